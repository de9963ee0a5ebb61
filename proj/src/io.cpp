#include "metriccalc/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mc::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json space_to_json(const Space& space) {
    json j;
    j["weights"] = space.weights();
    if (!space.labels().empty()) j["labels"] = space.labels();
    if (space.has_coords()) {
        json pts = json::array();
        for (int i = 0; i < space.size(); ++i) {
            json p = json::array();
            for (int k = 0; k < space.dim(); ++k) p.push_back(space.coord(i, k));
            pts.push_back(std::move(p));
        }
        j["points"] = std::move(pts);
        if (space.snowflake_alpha() == 1.0)
            j["metric"] = "euclidean";
        else
            j["metric"] = json{{"snowflake", space.snowflake_alpha()}};
    } else {
        json rows = json::array();
        for (int i = 0; i < space.size(); ++i) {
            json row = json::array();
            for (int k = 0; k < space.size(); ++k) row.push_back(space.dist(i, k));
            rows.push_back(std::move(row));
        }
        j["dist"] = std::move(rows);
        j["metric"] = "matrix";
    }
    return j;
}

Space space_from_json(const json& j) {
    if (!j.contains("weights")) throw std::invalid_argument("space json: missing weights");
    std::vector<double> weights = j.at("weights").get<std::vector<double>>();
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();

    if (j.contains("points")) {
        const json& pts = j.at("points");
        if (pts.empty()) throw std::invalid_argument("space json: empty point list");
        const int dim = static_cast<int>(pts.front().size());
        std::vector<double> coords;
        coords.reserve(pts.size() * dim);
        for (const json& p : pts) {
            if (static_cast<int>(p.size()) != dim)
                throw std::invalid_argument("space json: ragged point coordinates");
            for (const json& c : p) coords.push_back(c.get<double>());
        }
        double alpha = 1.0;
        if (j.contains("metric") && j.at("metric").is_object())
            alpha = j.at("metric").at("snowflake").get<double>();
        return Space::from_coords(std::move(coords), dim, std::move(weights), alpha, std::move(labels));
    }
    if (j.contains("dist")) {
        const json& rows = j.at("dist");
        const int n = static_cast<int>(rows.size());
        std::vector<double> dist;
        dist.reserve(static_cast<std::size_t>(n) * n);
        for (const json& row : rows) {
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("space json: distance matrix not square");
            for (const json& d : row) dist.push_back(d.get<double>());
        }
        return Space::from_matrix(std::move(dist), std::move(weights), std::move(labels));
    }
    throw std::invalid_argument("space json: need either points or dist");
}

json stencil_to_json(const Derivation& d) {
    json pts = json::array();
    for (int x = 0; x < d.space().size(); ++x) {
        json st = json::array();
        for (const auto& e : d.stencil(x)) st.push_back(json::array({e.neighbor, e.weight}));
        pts.push_back(json{{"center", x}, {"stencil", std::move(st)}});
    }
    return json{{"points", std::move(pts)}};
}

Derivation stencil_from_json(const Space& space, const json& j) {
    std::vector<std::vector<std::pair<int, double>>> st(space.size());
    for (const json& entry : j.at("points")) {
        const int center = entry.at("center").get<int>();
        if (center < 0 || center >= space.size())
            throw std::invalid_argument("stencil json: bad center index");
        for (const json& pair : entry.at("stencil"))
            st[center].push_back({pair.at(0).get<int>(), pair.at(1).get<double>()});
    }
    return Derivation(space, std::move(st));
}

json stratification_to_json(const Stratification& s) {
    json strata = json::object();
    for (int r = 0; r < static_cast<int>(s.strata.size()); ++r)
        if (!s.strata[r].empty()) strata[std::to_string(r)] = s.strata[r];
    json bases = json::object();
    for (const auto& [r, pieces] : s.bases) {
        json plist = json::array();
        for (const StratumPiece& p : pieces)
            plist.push_back(json{{"points", p.points}, {"derivations", p.basis}});
        bases[std::to_string(r)] =
            json{{"derivations", pieces.front().basis}, {"pieces", std::move(plist)}};
    }
    return json{{"rank", s.rank}, {"strata", std::move(strata)}, {"bases", std::move(bases)}};
}

json atlas_to_json(const Atlas& a) {
    json charts = json::array();
    for (const Chart& c : a.charts) {
        json jc{{"domain", c.domain}, {"functions", c.functions}};
        if (c.dual_record >= 0) {
            const DualBasisRecord& rec = a.duals[c.dual_record];
            jc["method"] = json{{"dual", json{{"derivations", rec.rows},
                                              {"eps_floor", rec.eps_floor},
                                              {"max_inverse_error", rec.max_inverse_error},
                                              {"max_delta_error", rec.max_delta_error}}}};
        } else {
            jc["method"] = c.functions.empty() ? "zero_dimensional" : "lsq";
        }
        charts.push_back(std::move(jc));
    }
    return json{{"charts", std::move(charts)}, {"dimension", a.dimension}, {"leftover", a.leftover}};
}

std::string field_to_csv(const ScalarField& f) {
    std::string out = "point,value\n";
    for (int i = 0; i < f.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(f[i]);
        out += '\n';
    }
    return out;
}

std::vector<double> field_values_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("field csv: empty");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("field csv: malformed row");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return values;
}

std::string lip_profile_to_csv(const LipProfile& p) {
    std::string out = "point,r,varlip,upper,lower\n";
    for (const auto& row : p.rows) {
        out += std::to_string(row.point);
        out += ',';
        out += format_double(row.r);
        out += ',';
        out += format_double(row.varlip);
        out += ',';
        out += format_double(row.upper);
        out += ',';
        out += format_double(row.lower);
        out += '\n';
    }
    return out;
}

std::string component_table_to_csv(const ComponentTable& t) {
    std::string out = "derivation,generator,point,value\n";
    for (int i = 0; i < t.n_derivations; ++i)
        for (int k = 0; k < t.n_generators; ++k)
            for (int x = 0; x < t.n_points; ++x) {
                out += std::to_string(i);
                out += ',';
                out += std::to_string(k);
                out += ',';
                out += std::to_string(x);
                out += ',';
                out += format_double(t.at(x, i, k));
                out += '\n';
            }
    return out;
}

std::string partial_derivatives_to_csv(const PartialDerivativeTable& pd) {
    std::string out = "point,j,value,residual\n";
    for (std::size_t di = 0; di < pd.domain.size(); ++di)
        for (std::size_t j = 0; j < pd.functions.size(); ++j) {
            out += std::to_string(pd.domain[di]);
            out += ',';
            out += std::to_string(j);
            out += ',';
            out += format_double(pd.at(di, static_cast<int>(j)));
            out += ',';
            out += format_double(pd.residual[di]);
            out += '\n';
        }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace mc::io
