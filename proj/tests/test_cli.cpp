#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metriccalc/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* env = std::getenv("METRICCALC_BIN");
    REQUIRE_MESSAGE(env != nullptr, "METRICCALC_BIN must point at the CLI binary");
    return env;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mc_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const json& j) { mc::io::write_text_file(p.string(), j.dump(2)); }

} // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("definitely-not-a-subcommand --config x.json") == 1);
    CHECK(run("lip") == 1);                       // missing --config
    CHECK(run("lip --config /nonexistent.json") == 1);
}

TEST_CASE("lip subcommand on the 1-D grid reports upper ~ 1 at interior points") {
    const fs::path dir = fresh_dir("lip");
    write(dir / "cfg.json", json{{"space", {{"kind", "grid"}, {"dim", 1}, {"side", 65}, {"extent", 1.0}}},
                                 {"field", {{"kind", "coordinate"}, {"axis", 0}}},
                                 {"out", (dir / "out").string()}});
    CHECK(run("lip --config " + (dir / "cfg.json").string()) == 0);
    const json lip = json::parse(mc::io::read_text_file((dir / "out" / "lip.json").string()));
    const auto upper = lip.at("upper").get<std::vector<double>>();
    for (int i = 1; i + 1 < 65; ++i) CHECK(upper[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fs::exists(dir / "out" / "lip.csv"));
    CHECK(fs::exists(dir / "out" / "run.json"));
}

TEST_CASE("stratify subcommand recovers the half-dependent example") {
    const fs::path dir = fresh_dir("stratify");
    // Two custom stencils: D2 = D1/2 on points 0-4, backward difference on 5-9.
    json s1points = json::array(), s2points = json::array();
    for (int i = 0; i <= 8; ++i)
        s1points.push_back(json{{"center", i}, {"stencil", json::array({json::array({i + 1, 1.0})})}});
    s1points.push_back(json{{"center", 9}, {"stencil", json::array({json::array({7, 1.0})})}});
    for (int i = 0; i <= 4; ++i)
        s2points.push_back(json{{"center", i}, {"stencil", json::array({json::array({i + 1, 0.5})})}});
    for (int i = 5; i <= 9; ++i)
        s2points.push_back(json{{"center", i}, {"stencil", json::array({json::array({i - 1, 1.0})})}});
    write(dir / "d1.json", json{{"points", s1points}});
    write(dir / "d2.json", json{{"points", s2points}});
    write(dir / "cfg.json",
          json{{"space", {{"kind", "grid"}, {"dim", 1}, {"side", 10}, {"extent", 9.0}}},
               {"derivations",
                json::array({json{{"scheme", "file"}, {"path", (dir / "d1.json").string()}},
                             json{{"scheme", "file"}, {"path", (dir / "d2.json").string()}}})},
               {"generators",
                {{"kind", "fields"},
                 {"fields", json::array({json{{"kind", "coordinate"}, {"axis", 0}},
                                         json{{"kind", "monomial"}, {"powers", json::array({2})}}})}}},
               {"out", (dir / "out").string()}});
    CHECK(run("stratify --config " + (dir / "cfg.json").string()) == 0);
    const json s = json::parse(mc::io::read_text_file((dir / "out" / "stratify.json").string()));
    CHECK(s.at("strata").at("1").get<std::vector<int>>() == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(s.at("strata").at("2").get<std::vector<int>>() == std::vector<int>{5, 6, 7, 8, 9});
}

TEST_CASE("invariant violations exit with code 2 and a witness file") {
    const fs::path dir = fresh_dir("violation");
    // Distance matrix violating the triangle inequality.
    write(dir / "space.json",
          json{{"dist", json::array({json::array({0.0, 1.0, 5.0}), json::array({1.0, 0.0, 1.0}),
                                     json::array({5.0, 1.0, 0.0})})},
               {"metric", "matrix"},
               {"weights", json::array({1.0, 1.0, 1.0})}});
    write(dir / "cfg.json",
          json{{"space", {{"kind", "file"}, {"path", (dir / "space.json").string()}}},
               {"out", (dir / "out").string()}});
    CHECK(run("space --config " + (dir / "cfg.json").string()) == 2);
    CHECK(fs::exists(dir / "out" / "violations.json"));
}

TEST_CASE("fields load from point,value CSV files") {
    const fs::path dir = fresh_dir("values_file");
    std::string csv = "point,value\n";
    for (int i = 0; i < 9; ++i) csv += std::to_string(i) + "," + std::to_string(0.25 * i) + "\n";
    mc::io::write_text_file((dir / "f.csv").string(), csv);
    write(dir / "cfg.json",
          json{{"space", {{"kind", "grid"}, {"dim", 1}, {"side", 9}, {"extent", 8.0}}},
               {"derivations", json::array({json{{"scheme", "axis"}, {"axis", 0}}})},
               {"field", {{"kind", "values_file"}, {"path", (dir / "f.csv").string()}}},
               {"out", (dir / "out").string()}});
    CHECK(run("derive --config " + (dir / "cfg.json").string()) == 0);
    // Df = 0.25 away from the flipped far-boundary stencil.
    const std::string body = mc::io::read_text_file((dir / "out" / "derive.csv").string());
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);
    CHECK(line == "derivation,point,value");
    std::getline(in, line);
    CHECK(line.substr(line.rfind(',') + 1) == "0.25");
}

TEST_CASE("atlas subcommand emits partial-derivative CSV when a field is configured") {
    const fs::path dir = fresh_dir("atlas_csv");
    write(dir / "cfg.json",
          json{{"space", {{"kind", "grid"}, {"dim", 2}, {"side", 9}, {"extent", 1.0}}},
               {"derivations",
                json::array({json{{"scheme", "axis"}, {"axis", 0}}, json{{"scheme", "axis"}, {"axis", 1}}})},
               {"generators", {{"kind", "coordinates"}}},
               {"field", {{"kind", "linear"}, {"coeffs", json::array({2.0, -1.0})}}},
               {"out", (dir / "out").string()}});
    CHECK(run("atlas --config " + (dir / "cfg.json").string()) == 0);
    const json atlas = json::parse(mc::io::read_text_file((dir / "out" / "atlas.json").string()));
    CHECK(atlas.at("dimension").get<int>() == 2);
    const std::string csv = mc::io::read_text_file((dir / "out" / "atlas.csv").string());
    CHECK(csv.rfind("point,j,value,residual", 0) == 0);
    // One row per (point, function).
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 81 * 2);
}

TEST_CASE("check-ineq with an oversized lambda exits 2 with violations") {
    const fs::path dir = fresh_dir("checkineq");
    write(dir / "cfg.json",
          json{{"space", {{"kind", "grid"}, {"dim", 2}, {"side", 9}, {"extent", 1.0}}},
               {"derivations",
                json::array({json{{"scheme", "axis"}, {"axis", 0}}, json{{"scheme", "axis"}, {"axis", 1}}})},
               {"corpus", json::array({json{{"kind", "coordinate"}, {"axis", 0}}})},
               {"lambda_field", {{"kind", "linear"}, {"coeffs", json::array({0.0, 0.0})}, {"offset", 2.0}}},
               {"out", (dir / "out").string()}});
    CHECK(run("check-ineq --config " + (dir / "cfg.json").string()) == 2);
    CHECK(fs::exists(dir / "out" / "violations.json"));
    // The same corpus passes without the oversized lambda.
    json cfg = json::parse(mc::io::read_text_file((dir / "cfg.json").string()));
    cfg.erase("lambda_field");
    cfg["out"] = (dir / "out2").string();
    write(dir / "cfg2.json", cfg);
    CHECK(run("check-ineq --config " + (dir / "cfg2.json").string()) == 0);
}

TEST_CASE("space subcommand round-trips through the JSON schema") {
    const fs::path dir = fresh_dir("space");
    write(dir / "cfg.json",
          json{{"space", {{"kind", "fat_cantor"}, {"depth", 4}, {"gap_ratio", 0.25}}},
               {"out", (dir / "out").string()},
               {"seed", 7}});
    CHECK(run("space --config " + (dir / "cfg.json").string()) == 0);
    const json js = json::parse(mc::io::read_text_file((dir / "out" / "space.json").string()));
    const mc::Space loaded = mc::io::space_from_json(js);
    CHECK(loaded.size() == 16);
    const json runj = json::parse(mc::io::read_text_file((dir / "out" / "run.json").string()));
    CHECK(runj.at("diagnostics").contains("doubling"));
}
