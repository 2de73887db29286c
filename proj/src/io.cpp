#include "cdorisk/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "cdorisk/error.hpp"

namespace cdorisk {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) {
        throw ParseError("cannot parse " + what + " from '" + s + "'");
    }
    return v;
}

CreditName make_name(const std::string& id, double spread_bp, double recovery, double notional) {
    if (id.empty()) throw ParseError("portfolio: empty name id");
    CreditName n{id, spread_bp * 1e-4, recovery, notional};
    try {
        validate(n);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return n;
}

Portfolio finish(std::vector<CreditName> names) {
    if (names.empty()) throw ParseError("portfolio: no names");
    try {
        return Portfolio::from_names(std::move(names));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
}

double number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ParseError(what + ": expected a number");
    return v.get<double>();
}

Tranche parse_tranche(const json& t, double original_notional) {
    reject_unknown(t, {"attach", "detach", "maturity", "coupon"}, "tranche");
    if (!t.contains("attach") || !t.contains("detach")) {
        throw ParseError("tranche: attach and detach are required");
    }
    Tranche tr;
    tr.attach = parse_strike(t["attach"], original_notional);
    tr.detach = parse_strike(t["detach"], original_notional);
    if (t.contains("maturity")) tr.maturity = number(t["maturity"], "tranche.maturity");
    if (t.contains("coupon")) tr.coupon = number(t["coupon"], "tranche.coupon");
    tr.zero_coupon = tr.coupon == 0.0;
    return tr;
}

}  // namespace

Portfolio read_portfolio_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("portfolio csv: missing header");
    const auto header = split(trim(line), ',');
    static constexpr std::array<std::string_view, 4> required{"id", "spread_bp", "recovery",
                                                              "notional"};
    std::array<std::size_t, 4> column{};
    for (std::size_t c = 0; c < required.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), required[c]);
        if (it == header.end()) {
            throw ParseError("portfolio csv: missing column '" + std::string(required[c]) + "'");
        }
        column[c] = static_cast<std::size_t>(it - header.begin());
    }
    if (header.size() != required.size()) {
        for (const auto& h : header) {
            if (std::find(required.begin(), required.end(), h) == required.end()) {
                throw ParseError("portfolio csv: unknown column '" + h + "'");
            }
        }
        throw ParseError("portfolio csv: duplicate columns");
    }

    std::vector<CreditName> names;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), ',');
        if (fields.size() != header.size()) {
            throw ParseError("portfolio csv: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields");
        }
        const std::string where = "row " + std::to_string(row);
        names.push_back(make_name(fields[column[0]], to_double(fields[column[1]], where + " spread_bp"),
                                  to_double(fields[column[2]], where + " recovery"),
                                  to_double(fields[column[3]], where + " notional")));
    }
    return finish(std::move(names));
}

Portfolio read_portfolio_json(const json& doc) {
    if (!doc.is_array()) throw ParseError("portfolio json: expected an array of names");
    std::vector<CreditName> names;
    for (const auto& rec : doc) {
        reject_unknown(rec, {"id", "spread_bp", "recovery", "notional"}, "portfolio json");
        for (const char* key : {"id", "spread_bp", "recovery", "notional"}) {
            if (!rec.contains(key)) throw ParseError(std::string("portfolio json: missing ") + key);
        }
        if (!rec["id"].is_string()) throw ParseError("portfolio json: id must be a string");
        names.push_back(make_name(rec["id"].get<std::string>(), number(rec["spread_bp"], "spread_bp"),
                                  number(rec["recovery"], "recovery"),
                                  number(rec["notional"], "notional")));
    }
    return finish(std::move(names));
}

Portfolio load_portfolio(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open portfolio " + path.string());
    if (path.extension() == ".json") {
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError("portfolio json: " + std::string(e.what()));
        }
        return read_portfolio_json(doc);
    }
    return read_portfolio_csv(in);
}

Portfolio demo_portfolio() {
    std::vector<CreditName> names;
    names.reserve(125);
    for (int i = 0; i < 125; ++i) {
        names.push_back({"N" + std::to_string(i + 1), 0.01, 0.4, 0.8});
    }
    return Portfolio::from_names(std::move(names));
}

Portfolio random_portfolio(std::uint64_t seed, std::size_t size) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CreditName> names;
    for (std::size_t i = 0; i < size; ++i) {
        const double spread_bp = 30.0 + 770.0 * u(rng);
        const double recovery = 0.2 + 0.4 * u(rng);
        const double notional = 0.5 + 1.5 * u(rng);
        names.push_back({"R" + std::to_string(i + 1), spread_bp * 1e-4, recovery, notional});
    }
    return Portfolio::from_names(std::move(names));
}

RecoveryModel parse_model_spec(std::string_view spec) {
    std::string s = trim(spec);
    double alpha = 1.0;
    if (const auto comma = s.find(','); comma != std::string::npos) {
        const std::string tail = trim(std::string_view(s).substr(comma + 1));
        s = trim(std::string_view(s).substr(0, comma));
        if (tail.rfind("alpha=", 0) != 0) throw ParseError("model spec: expected ',alpha=<a>'");
        alpha = to_double(tail.substr(6), "model alpha");
    }
    RecoveryModel model;
    if (s == "deterministic") {
        model = RecoveryModel::deterministic();
    } else if (s == "regularized") {
        model = RecoveryModel::regularized(alpha);
    } else if (s.rfind("constant:", 0) == 0) {
        model = RecoveryModel::constant(to_double(s.substr(9), "constant R_m"), alpha);
    } else {
        throw ParseError("model spec: unknown model '" + s + "'");
    }
    try {
        validate(model);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return model;
}

RecoveryModel parse_model_json(const json& doc) {
    if (doc.is_string()) return parse_model_spec(doc.get<std::string>());
    reject_unknown(doc, {"kind", "rm", "alpha"}, "recovery");
    if (!doc.contains("kind") || !doc["kind"].is_string()) {
        throw ParseError("recovery: 'kind' must be deterministic or stochastic");
    }
    const auto kind = doc["kind"].get<std::string>();
    if (kind == "deterministic") {
        if (doc.contains("rm") || doc.contains("alpha")) {
            throw ParseError("recovery: deterministic model takes no parameters");
        }
        return RecoveryModel::deterministic();
    }
    if (kind != "stochastic") throw ParseError("recovery: unknown kind '" + kind + "'");
    std::string rm = "constant:1";
    if (doc.contains("rm")) {
        if (!doc["rm"].is_string()) throw ParseError("recovery.rm must be a string");
        rm = doc["rm"].get<std::string>();
    }
    if (rm != "regularized" && rm.rfind("constant:", 0) != 0) {
        throw ParseError("recovery.rm: expected constant:<x> or regularized");
    }
    std::ostringstream spec;
    spec << rm;
    if (doc.contains("alpha")) {
        std::ostringstream a;
        a.precision(17);
        a << number(doc["alpha"], "recovery.alpha");
        spec << ",alpha=" << a.str();
    }
    return parse_model_spec(spec.str());
}

double parse_strike(const json& value, double original_notional) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        std::string s = trim(value.get<std::string>());
        if (!s.empty() && s.back() == '%') {
            return to_double(trim(std::string_view(s).substr(0, s.size() - 1)), "percent strike") /
                   100.0 * original_notional;
        }
        return to_double(s, "strike");
    }
    throw ParseError("strike: expected a number or a percent string");
}

RunConfig make_run_config(const json& doc, const CliOverrides& overrides) {
    reject_unknown(doc.is_null() ? json::object() : doc,
                   {"portfolio", "tranche", "correlation", "recovery", "models", "pricer", "p_max",
                    "output", "probability_grid", "name", "seed", "mc_paths", "figure_recovery",
                    "oracle_tranches"},
                   "config");
    const json cfg = doc.is_null() ? json::object() : doc;
    RunConfig rc;

    if (overrides.portfolio_path) {
        rc.portfolio_path = overrides.portfolio_path;
    } else if (cfg.contains("portfolio")) {
        if (!cfg["portfolio"].is_string()) throw ParseError("config.portfolio must be a path");
        rc.portfolio_path = cfg["portfolio"].get<std::string>();
    }
    rc.portfolio = rc.portfolio_path ? load_portfolio(*rc.portfolio_path) : demo_portfolio();
    const double N = rc.portfolio.original_notional;

    rc.tranche = cfg.contains("tranche") ? parse_tranche(cfg["tranche"], N)
                                         : Tranche::from_percent(15, 30, N);
    if (cfg.contains("correlation")) rc.rho = number(cfg["correlation"], "correlation");

    if (!overrides.model_specs.empty()) {
        for (const auto& s : overrides.model_specs) rc.models.push_back(parse_model_spec(s));
        rc.models_given = true;
    } else if (cfg.contains("models")) {
        if (!cfg["models"].is_array() || cfg["models"].empty()) {
            throw ParseError("config.models must be a nonempty array");
        }
        for (const auto& m : cfg["models"]) rc.models.push_back(parse_model_json(m));
        rc.models_given = true;
    } else if (cfg.contains("recovery")) {
        rc.models.push_back(parse_model_json(cfg["recovery"]));
        rc.models_given = true;
    } else {
        rc.models = {RecoveryModel::constant(1.0, 1.0)};
    }

    if (cfg.contains("pricer")) {
        const auto& p = cfg["pricer"];
        reject_unknown(p, {"factor_nodes", "loss_buckets_per_name", "discount_rate", "premium_frequency"},
                       "pricer");
        if (p.contains("factor_nodes")) rc.pricer.factor_nodes = p["factor_nodes"].get<std::size_t>();
        if (p.contains("loss_buckets_per_name")) {
            rc.pricer.loss_buckets_per_name = p["loss_buckets_per_name"].get<std::size_t>();
        }
        if (p.contains("discount_rate")) rc.pricer.discount_rate = number(p["discount_rate"], "discount_rate");
        if (p.contains("premium_frequency")) {
            rc.pricer.premium_frequency = number(p["premium_frequency"], "premium_frequency");
        }
    }
    if (overrides.nodes) rc.pricer.factor_nodes = *overrides.nodes;

    if (cfg.contains("p_max")) rc.p_max = number(cfg["p_max"], "p_max");
    if (overrides.p_max) rc.p_max = *overrides.p_max;
    if (!(rc.p_max > 0.0 && rc.p_max < 1.0)) throw ParseError("p_max must lie in (0,1)");

    if (cfg.contains("output")) rc.output_dir = cfg["output"].get<std::string>();
    if (overrides.output_dir) rc.output_dir = *overrides.output_dir;

    if (cfg.contains("probability_grid")) {
        for (const auto& v : cfg["probability_grid"]) rc.probability_grid.push_back(number(v, "probability_grid"));
        if (rc.probability_grid.empty()) throw ParseError("probability_grid must be nonempty");
    }
    if (cfg.contains("name")) rc.name_id = cfg["name"].get<std::string>();
    if (cfg.contains("seed")) rc.seed = cfg["seed"].get<std::uint64_t>();
    if (overrides.seed) rc.seed = *overrides.seed;
    if (cfg.contains("mc_paths")) rc.mc_paths = cfg["mc_paths"].get<std::size_t>();
    if (cfg.contains("figure_recovery")) rc.figure_recovery = number(cfg["figure_recovery"], "figure_recovery");
    if (cfg.contains("oracle_tranches")) {
        for (const auto& t : cfg["oracle_tranches"]) rc.oracle_tranches.push_back(parse_tranche(t, N));
    }

    try {
        validate(rc.pricer);
        validate(rc.tranche, rc.portfolio);
        if (!(rc.rho >= 0.0 && rc.rho < 1.0)) throw DomainError("correlation must lie in [0,1)");
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return rc;
}

RunConfig load_run_config(const CliOverrides& overrides) {
    if (!overrides.config_path) return make_run_config(json(), overrides);
    std::ifstream in(*overrides.config_path);
    if (!in) throw ParseError("cannot open config " + overrides.config_path->string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ParseError("config: " + std::string(e.what()));
    }
    // Relative portfolio paths are taken relative to the config file.
    if (doc.is_object() && doc.contains("portfolio") && doc["portfolio"].is_string()) {
        std::filesystem::path p = doc["portfolio"].get<std::string>();
        if (p.is_relative()) doc["portfolio"] = (overrides.config_path->parent_path() / p).string();
    }
    try {
        return make_run_config(doc, overrides);
    } catch (const json::exception& e) {
        throw ParseError("config: " + std::string(e.what()));
    }
}

}  // namespace cdorisk
