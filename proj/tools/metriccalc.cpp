#include "metriccalc/errors.hpp"
#include "metriccalc/io.hpp"
#include "metriccalc/mds.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    json config;
    fs::path out;
    std::unique_ptr<mc::Space> space;
    std::vector<mc::ScalarField> generators;
    std::vector<mc::Derivation> derivations;
    std::unique_ptr<mc::ScaleLadder> ladder;
    std::unique_ptr<mc::ResolutionContext> ctx;
};

double cfg_num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

mc::Space build_space(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "grid")
        return mc::make_grid(spec.at("dim").get<int>(), spec.at("side").get<int>(),
                             cfg_num(spec, "extent", 1.0));
    if (kind == "standard_cantor") return mc::make_standard_cantor(spec.at("depth").get<int>());
    if (kind == "fat_cantor")
        return mc::make_fat_cantor(spec.at("depth").get<int>(), spec.at("gap_ratio").get<double>());
    if (kind == "snowflake") {
        const mc::Space base = build_space(spec.at("base"));
        return mc::make_snowflake(base, spec.at("alpha").get<double>());
    }
    if (kind == "file")
        return mc::io::space_from_json(json::parse(mc::io::read_text_file(spec.at("path"))));
    throw std::invalid_argument("space kind '" + kind + "' not recognized");
}

mc::ScalarField build_field(const mc::Space& space, const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "coordinate") {
        const int axis = spec.at("axis").get<int>();
        if (!space.has_coords() || axis < 0 || axis >= space.dim())
            throw std::invalid_argument("coordinate field: bad axis");
        std::vector<double> v(space.size());
        for (int i = 0; i < space.size(); ++i) v[i] = space.coord(i, axis);
        return {space, std::move(v)};
    }
    if (kind == "distance") {
        return mc::landmark_generators(space, {spec.at("point").get<int>()}).front();
    }
    if (kind == "monomial") {
        const auto powers = spec.at("powers").get<std::vector<int>>();
        if (!space.has_coords() || static_cast<int>(powers.size()) != space.dim())
            throw std::invalid_argument("monomial field: powers must match the space dimension");
        std::vector<double> v(space.size(), 1.0);
        for (int i = 0; i < space.size(); ++i)
            for (int k = 0; k < space.dim(); ++k)
                for (int p = 0; p < powers[k]; ++p) v[i] *= space.coord(i, k);
        return {space, std::move(v)};
    }
    if (kind == "linear") {
        const auto coeffs = spec.at("coeffs").get<std::vector<double>>();
        const double offset = cfg_num(spec, "offset", 0.0);
        if (!space.has_coords() || static_cast<int>(coeffs.size()) != space.dim())
            throw std::invalid_argument("linear field: coeffs must match the space dimension");
        std::vector<double> v(space.size(), offset);
        for (int i = 0; i < space.size(); ++i)
            for (int k = 0; k < space.dim(); ++k) v[i] += coeffs[k] * space.coord(i, k);
        return {space, std::move(v)};
    }
    if (kind == "values") return {space, spec.at("values").get<std::vector<double>>()};
    if (kind == "values_file")
        return {space, mc::io::field_values_from_csv(mc::io::read_text_file(spec.at("path")))};
    throw std::invalid_argument("field kind '" + kind + "' not recognized");
}

mc::Derivation build_derivation(const mc::Space& space, const json& spec) {
    const std::string scheme = spec.at("scheme").get<std::string>();
    if (scheme == "axis")
        return mc::make_axis_derivation(space, spec.at("axis").get<int>(), cfg_num(spec, "step", 0.0));
    if (scheme == "knn")
        return mc::make_knn_derivation(space, spec.at("k").get<int>(), cfg_num(spec, "radius", 0.0));
    if (scheme == "file")
        return mc::io::stencil_from_json(space, json::parse(mc::io::read_text_file(spec.at("path"))));
    throw std::invalid_argument("derivation scheme '" + scheme + "' not recognized");
}

std::vector<mc::ScalarField> build_generators(const mc::Space& space, const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "landmarks")
        return mc::landmark_generators(space, spec.at("points").get<std::vector<int>>());
    if (kind == "coordinates") {
        std::vector<mc::ScalarField> out;
        for (int k = 0; k < space.dim(); ++k)
            out.push_back(build_field(space, json{{"kind", "coordinate"}, {"axis", k}}));
        return out;
    }
    if (kind == "fields") {
        std::vector<mc::ScalarField> out;
        for (const json& f : spec.at("fields")) out.push_back(build_field(space, f));
        return out;
    }
    throw std::invalid_argument("generator kind '" + kind + "' not recognized");
}

Run prepare(const json& config, bool need_derivations, bool need_generators) {
    Run run;
    run.config = config;
    run.out = config.contains("out") ? fs::path(config.at("out").get<std::string>()) : fs::path(".");
    fs::create_directories(run.out);
    run.space = std::make_unique<mc::Space>(build_space(config.at("space")));

    if (config.contains("ladder")) {
        const json& l = config.at("ladder");
        run.ladder = std::make_unique<mc::ScaleLadder>(mc::ScaleLadder::geometric(
            l.at("r0").get<double>(), cfg_num(l, "ratio", 0.5), l.at("floor").get<double>()));
    } else {
        run.ladder = std::make_unique<mc::ScaleLadder>(mc::ScaleLadder::for_space(*run.space));
    }
    run.ctx = std::make_unique<mc::ResolutionContext>(*run.space, *run.ladder);

    if (need_derivations) {
        if (!config.contains("derivations") || config.at("derivations").empty())
            throw std::invalid_argument("config: this subcommand needs a derivations list");
        for (const json& d : config.at("derivations"))
            run.derivations.push_back(build_derivation(*run.space, d));
    }
    if (need_generators) {
        if (!config.contains("generators"))
            throw std::invalid_argument("config: this subcommand needs a generators spec");
        run.generators = build_generators(*run.space, config.at("generators"));
    }
    return run;
}

void write_run_json(const Run& run, const std::string& subcommand, json extra = json::object()) {
    json echo = run.config;
    echo.erase("out"); // artifact location, not part of the computation
    echo["subcommand"] = subcommand;
    echo["resolved_ladder"] = run.ladder->radii;
    if (!extra.empty()) echo["diagnostics"] = std::move(extra);
    mc::io::write_text_file((run.out / "run.json").string(), echo.dump(2) + "\n");
}

int cmd_space(const json& config) {
    Run run = prepare(config, false, false);
    const auto seed = static_cast<std::uint64_t>(cfg_num(config, "seed", 0.0));
    const int samples = static_cast<int>(cfg_num(config, "sample_count", 2000.0));
    const mc::DoublingProfile prof = doubling_profile(*run.space, samples, seed);
    mc::io::write_text_file((run.out / "space.json").string(),
                            mc::io::space_to_json(*run.space).dump(2) + "\n");
    write_run_json(run, "space",
                   json{{"n", run.space->size()},
                        {"diameter", run.space->diameter()},
                        {"median_nn_dist", run.space->median_nn_dist()},
                        {"doubling",
                         json{{"C", prof.C},
                              {"kappa", prof.kappa},
                              {"degenerate", prof.degenerate},
                              {"pairs", prof.pairs},
                              {"seed", seed}}}});
    return 0;
}

int cmd_lip(const json& config) {
    Run run = prepare(config, false, false);
    const mc::ScalarField f = build_field(*run.space, config.at("field"));
    const mc::LipProfile prof = mc::lip_profile(f, *run.ladder);
    mc::io::write_text_file((run.out / "lip.csv").string(), mc::io::lip_profile_to_csv(prof));
    json j{{"upper", prof.upper}, {"lower", prof.lower}};
    std::vector<int> isolated;
    for (int x = 0; x < run.space->size(); ++x)
        if (prof.isolated[x]) isolated.push_back(x);
    j["isolated"] = isolated;
    j["glip"] = mc::glip(f);
    j["lip_norm"] = mc::lip_norm(f);
    mc::io::write_text_file((run.out / "lip.json").string(), j.dump(2) + "\n");
    write_run_json(run, "lip");
    return 0;
}

int cmd_derive(const json& config) {
    Run run = prepare(config, true, false);
    const mc::ScalarField f = build_field(*run.space, config.at("field"));
    json stencils = json::array();
    std::string csv = "derivation,point,value\n";
    for (std::size_t i = 0; i < run.derivations.size(); ++i) {
        stencils.push_back(mc::io::stencil_to_json(run.derivations[i]));
        const mc::ScalarField df = mc::apply(run.derivations[i], f);
        for (int x = 0; x < run.space->size(); ++x)
            csv += std::to_string(i) + "," + std::to_string(x) + "," + mc::io::format_double(df[x]) + "\n";
    }
    mc::io::write_text_file((run.out / "derive.json").string(),
                            json{{"derivations", std::move(stencils)}}.dump(2) + "\n");
    mc::io::write_text_file((run.out / "derive.csv").string(), csv);
    write_run_json(run, "derive");
    return 0;
}

int cmd_stratify(const json& config) {
    Run run = prepare(config, true, true);
    const double tau = cfg_num(config, "tau", 1e-6);
    const mc::ComponentTable table = mc::component_table(run.derivations, run.generators);
    const mc::Stratification s = mc::stratify(table, tau);
    mc::io::write_text_file((run.out / "stratify.json").string(),
                            mc::io::stratification_to_json(s).dump(2) + "\n");
    mc::io::write_text_file((run.out / "stratify.csv").string(), mc::io::component_table_to_csv(table));
    write_run_json(run, "stratify");
    return 0;
}

int cmd_atlas(const json& config) {
    Run run = prepare(config, true, true);
    const double tau = cfg_num(config, "tau", 1e-6);
    const double eps_floor = cfg_num(config, "eps_floor", 1e-3);
    const mc::Atlas atlas = mc::build_atlas(run.generators, run.derivations, tau, eps_floor, *run.ctx);
    mc::io::write_text_file((run.out / "atlas.json").string(),
                            mc::io::atlas_to_json(atlas).dump(2) + "\n");
    // With a field configured, also dump its per-chart partial derivatives.
    if (config.contains("field")) {
        const mc::ScalarField f = build_field(*run.space, config.at("field"));
        std::string csv = "point,j,value,residual\n";
        for (const mc::Chart& chart : atlas.charts) {
            if (chart.dual_record < 0) continue;
            const mc::PartialDerivativeTable pd =
                mc::partial_derivatives_dual(f, run.generators, atlas.duals[chart.dual_record], *run.ctx);
            std::string body = mc::io::partial_derivatives_to_csv(pd);
            csv += body.substr(body.find('\n') + 1);
        }
        mc::io::write_text_file((run.out / "atlas.csv").string(), csv);
    }
    write_run_json(run, "atlas");
    return 0;
}

int cmd_check_ineq(const json& config) {
    Run run = prepare(config, true, false);
    if (!config.contains("corpus") || config.at("corpus").empty())
        throw std::invalid_argument("config: check-ineq needs a corpus");
    std::vector<mc::ScalarField> corpus;
    for (const json& f : config.at("corpus")) corpus.push_back(build_field(*run.space, f));
    std::optional<mc::ScalarField> given;
    if (config.contains("lambda_field")) given = build_field(*run.space, config.at("lambda_field"));
    const mc::InequalityReport rep =
        mc::inequality_report(run.derivations, corpus, *run.ctx, given ? &*given : nullptr);

    json j;
    j["exact_bounds"] = rep.exact_bounds;
    j["degenerate_corpus"] = rep.degenerate_corpus;
    if (!rep.degenerate_corpus) j["min_lambda"] = rep.min_lambda;
    j["upper_violation_count"] = rep.upper_violations.size();
    j["reverse_violation_count"] = rep.reverse_violations.size();
    j["given_violation_count"] = rep.given_violations.size();
    mc::io::write_text_file((run.out / "check-ineq.json").string(), j.dump(2) + "\n");
    write_run_json(run, "check-ineq");

    json violations = json::array();
    for (const auto& v : rep.upper_violations)
        if (v.within_reach)
            violations.push_back(json{{"kind", "upper"},
                                      {"derivation", v.derivation},
                                      {"field", v.field},
                                      {"point", v.point},
                                      {"lhs", v.lhs},
                                      {"rhs", v.rhs}});
    for (const auto& v : rep.reverse_violations)
        violations.push_back(
            json{{"kind", "reverse"}, {"field", v.field}, {"point", v.point}, {"max_df", v.max_df}});
    for (const auto& v : rep.given_violations)
        violations.push_back(json{{"kind", "given_lambda"},
                                  {"field", v.field},
                                  {"point", v.point},
                                  {"lhs", v.lhs},
                                  {"rhs", v.rhs}});
    if (!violations.empty()) {
        mc::io::write_text_file((run.out / "violations.json").string(), violations.dump(2) + "\n");
        return 2;
    }
    return 0;
}

int cmd_sobolev(const json& config) {
    Run run = prepare(config, true, true);
    const mc::ScalarField f = build_field(*run.space, config.at("field"));
    const double tau = cfg_num(config, "tau", 1e-6);
    const double eps_floor = cfg_num(config, "eps_floor", 1e-3);
    const double p = cfg_num(config, "p", 2.0);
    const mc::Atlas atlas = mc::build_atlas(run.generators, run.derivations, tau, eps_floor, *run.ctx);
    const mc::SobolevNorm norm = mc::sobolev_norm(f, atlas, run.generators, p, *run.ctx);
    mc::io::write_text_file((run.out / "sobolev.json").string(),
                            json{{"p", p},
                                 {"norm", norm.value},
                                 {"lp_term", norm.lp_term},
                                 {"dlp_term", norm.dlp_term},
                                 {"atlas_dimension", atlas.dimension}}
                                    .dump(2) +
                                "\n");
    write_run_json(run, "sobolev");
    return 0;
}

int cmd_probe_dim(const json& config) {
    Run run = prepare(config, true, false);
    if (!config.contains("candidates") || config.at("candidates").empty())
        throw std::invalid_argument("config: probe-dim needs candidate fields");
    std::vector<mc::ScalarField> candidates;
    for (const json& f : config.at("candidates")) candidates.push_back(build_field(*run.space, f));
    const double tau = cfg_num(config, "probe_tau", 0.0);
    const mc::DimensionProbeReport rep =
        mc::dimension_probe(run.derivations, candidates, tau, *run.ctx);
    json j;
    j["declined"] = rep.declined;
    j["dependent_fraction"] = rep.dependent_fraction;
    std::vector<int> dep(rep.dependent.begin(), rep.dependent.end());
    j["dependent"] = dep;
    j["witness_domain_size"] = rep.witness_domain.size();
    mc::io::write_text_file((run.out / "probe-dim.json").string(), j.dump(2) + "\n");
    write_run_json(run, "probe-dim");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-order calculus on finite metric measure spaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string ladder_override;
    double tau_override = -1.0;
    std::uint64_t seed_override = 0;
    bool seed_given = false;

    const std::vector<std::string> names = {"space",      "lip",     "derive",    "stratify",
                                            "atlas",      "check-ineq", "sobolev", "probe-dim"};
    for (const std::string& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_override, "output directory");
        sub->add_option("--seed", seed_override, "seed for sampled procedures")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--tau", tau_override, "rank threshold");
        sub->add_option("--ladder", ladder_override, "ladder spec r0:ratio:floor");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    json config;
    try {
        config = json::parse(mc::io::read_text_file(config_path));
        if (!out_override.empty()) config["out"] = out_override;
        if (seed_given) config["seed"] = seed_override;
        if (tau_override >= 0.0) config["tau"] = tau_override;
        if (!ladder_override.empty()) {
            const auto c1 = ladder_override.find(':');
            const auto c2 = ladder_override.find(':', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw std::invalid_argument("--ladder expects r0:ratio:floor");
            config["ladder"] = json{{"r0", std::stod(ladder_override.substr(0, c1))},
                                    {"ratio", std::stod(ladder_override.substr(c1 + 1, c2 - c1 - 1))},
                                    {"floor", std::stod(ladder_override.substr(c2 + 1))}};
        }

        if (sub == "space") return cmd_space(config);
        if (sub == "lip") return cmd_lip(config);
        if (sub == "derive") return cmd_derive(config);
        if (sub == "stratify") return cmd_stratify(config);
        if (sub == "atlas") return cmd_atlas(config);
        if (sub == "check-ineq") return cmd_check_ineq(config);
        if (sub == "sobolev") return cmd_sobolev(config);
        if (sub == "probe-dim") return cmd_probe_dim(config);
        std::cerr << "unknown subcommand " << sub << "\n";
        return 1;
    } catch (const mc::ViolationError& e) {
        json j;
        j["kind"] = e.kind();
        j["message"] = e.what();
        json detail = json::object();
        for (const auto& [k, v] : e.detail()) detail[k] = v;
        j["detail"] = detail;
        try {
            fs::path out = config.contains("out") ? fs::path(config.at("out").get<std::string>())
                                                  : fs::path(".");
            fs::create_directories(out);
            mc::io::write_text_file((out / "violations.json").string(),
                                    json::array({j}).dump(2) + "\n");
        } catch (...) {
        }
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
