#include "covert/cli.hpp"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"
#include "covert/game.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace covert::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto item = trim(text.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

std::string hex64(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const FieldKind* field_kind(std::string_view name) {
    for (const auto& f : config_fields())
        if (f.name == name) return &f.kind;
    return nullptr;
}

/// Canonical field behind a key and whether its value is given in dBm.
struct ResolvedKey {
    std::string field;
    bool dbm = false;
};

std::optional<ResolvedKey> resolve_key(std::string_view key) {
    if (field_kind(key)) return ResolvedKey{std::string(key), false};
    for (std::string_view suffix : {"_dbm", "_mw"}) {
        if (!ends_with(key, suffix)) continue;
        const auto base = key.substr(0, key.size() - suffix.size());
        const FieldKind* k = field_kind(base);
        if (k && *k == FieldKind::Power) return ResolvedKey{std::string(base), suffix == "_dbm"};
    }
    return std::nullopt;
}

void apply_value(NetworkConfig& c, const ResolvedKey& k, double v) { set_field(c, k.field, k.dbm ? dbm_to_mw(v) : v); }

bool is_strategy_power(std::string_view field) { return field == "p_s" || field == "p_s_mw" || field == "p_s_dbm"; }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : i == n - 1 ? b : a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> v = linspace(std::log(a), std::log(b), n);
    for (auto& x : v) x = std::exp(x);
    if (n > 1) {
        v.front() = a;
        v.back() = b;
    }
    return v;
}

bool is_link_kind(mc::MetricKind k) {
    return k == mc::MetricKind::SinrPS || k == mc::MetricKind::PhPS || k == mc::MetricKind::SinrTS ||
           k == mc::MetricKind::PhTS;
}

double analytic_value(mc::MetricKind k, double p_s, double x, const NetworkConfig& c) {
    switch (k) {
        case mc::MetricKind::SinrPS: return sinr_prob_ps({Scheme::PS, p_s, x}, c);
        case mc::MetricKind::PhPS: return ph_prob_ps({Scheme::PS, p_s, x}, c);
        case mc::MetricKind::SinrTS: return sinr_prob_ts({Scheme::TS, p_s, x}, c);
        case mc::MetricKind::PhTS: return ph_prob_ts({Scheme::TS, p_s, x}, c);
        case mc::MetricKind::FA: return fa_prob(p_s, x, c);
        case mc::MetricKind::MD: return md_prob(p_s, x, c);
        case mc::MetricKind::InterferenceCdfAt: return interference_cdf(x, interference_params(p_s, c));
    }
    return 0.0;
}

struct ValidationRow {
    mc::MetricKind kind;
    double x, analytic, mc, ci, tol;
    bool pass;
};

std::vector<ValidationRow> validation_rows(const NetworkConfig& c, double p_s, std::vector<mc::MetricKind> kinds,
                                           std::uint64_t trials, std::uint64_t seed, int grid, unsigned workers) {
    if (kinds.empty())
        kinds = {mc::MetricKind::SinrPS, mc::MetricKind::PhPS, mc::MetricKind::SinrTS,
                 mc::MetricKind::PhTS,   mc::MetricKind::FA,   mc::MetricKind::MD};
    const mc::SimWindow w = mc::default_window(p_s, c, trials, seed);
    mc::check(w);
    if (grid < 0) throw ConfigError("grid must be positive");
    const int n_rho = grid > 0 ? grid : 10;
    const int n_tau = grid > 0 ? grid : 20;
    std::vector<double> rhos;
    for (int k = 1; k <= n_rho; ++k) rhos.push_back(static_cast<double>(k) / n_rho);
    // Thresholds from well below to well above the optimal one at the defaults.
    const std::vector<double> taus = geomspace(0.1, 30.0, n_tau);

    const bool need_rx = std::any_of(kinds.begin(), kinds.end(), [](auto k) {
        return is_link_kind(k) || k == mc::MetricKind::InterferenceCdfAt;
    });
    const bool need_adv = std::any_of(kinds.begin(), kinds.end(),
                                      [](auto k) { return k == mc::MetricKind::FA || k == mc::MetricKind::MD; });
    std::vector<mc::ReceiverSample> rx;
    std::vector<mc::AdversarySample> adv;
    if (need_rx) rx = mc::simulate_receiver(p_s, c, w, workers);
    if (need_adv) adv = mc::simulate_adversary(p_s, c, w, workers);

    std::vector<ValidationRow> rows;
    for (auto k : kinds) {
        const auto& xs = is_link_kind(k) ? rhos : taus;
        auto est = (k == mc::MetricKind::FA || k == mc::MetricKind::MD) ? mc::estimate_from_adversary(k, adv, xs, c)
                                                                         : mc::estimate_from_receiver(k, rx, xs, c);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double a = analytic_value(k, p_s, xs[i], c);
            const double tol = std::max(0.02, 3.0 * est[i].ci_halfwidth);
            rows.push_back({k, xs[i], a, est[i].value, est[i].ci_halfwidth, tol, std::abs(a - est[i].value) <= tol});
        }
    }
    return rows;
}

std::vector<std::string> equilibrium_cells(const EquilibriumResult& r) {
    return {fmt(r.strategy.p_s), fmt(mw_to_dbm(r.strategy.p_s)), fmt(r.strategy.rho), fmt(r.utility), fmt(r.sinr),
            fmt(r.ph), fmt(r.lower.tau_star), fmt(r.lower.error_star), fmt(r.slack_power), fmt(r.slack_covert)};
}

std::vector<std::string> infeasible_cells(const InfeasibleError& e) {
    std::vector<std::string> cells(8, "");
    const auto& s = e.slacks();
    cells.push_back(s.size() > 0 ? fmt(s[0]) : "");
    cells.push_back(s.size() > 1 ? fmt(s[1]) : "");
    return cells;
}

const std::vector<std::string> kEquilibriumColumns{"p_s_mw",   "p_s_dbm",    "rho",         "utility",
                                                   "sinr",     "ph",         "tau_star_mw", "error_star",
                                                   "slack_power", "slack_covert"};

EquilibriumResult solve_one(Scheme s, const NetworkConfig& c, bool grid_solver, int grid, const GaSpec& ga) {
    return grid_solver ? grid_equilibrium(s, c, grid > 0 ? grid : 100, grid > 0 ? grid : 100)
                       : solve_equilibrium(s, c, ga);
}

std::vector<Scheme> parse_schemes(std::string_view text) {
    std::vector<Scheme> out;
    for (const auto& item : split_list(text)) {
        std::string low = item;
        std::transform(low.begin(), low.end(), low.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (low == "both") {
            out.push_back(Scheme::PS);
            out.push_back(Scheme::TS);
        } else {
            out.push_back(parse_scheme(item));
        }
    }
    if (out.empty()) throw ConfigError("no scheme given");
    return out;
}

nlohmann::json config_json(const NetworkConfig& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : config_fields()) j[std::string(f.name)] = get_field(c, f.name);
    return j;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
    std::vector<KeyValue> out;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
        if (kv.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(kv.key).second)
            throw ConfigError("line " + std::to_string(line_no) + ": repeated key '" + kv.key + "'");
        out.push_back(std::move(kv));
    }
    return out;
}

double parse_number(std::string_view text, std::string_view what) {
    text = trim(text);
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError("bad number for " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

void apply_setting(NetworkConfig& c, std::string_view key, std::string_view value) {
    const auto k = resolve_key(key);
    if (!k) throw ConfigError("unknown config key '" + std::string(key) + "'");
    apply_value(c, *k, parse_number(value, key));
}

NetworkConfig parse_config(std::string_view text) {
    NetworkConfig c = NetworkConfig::defaults();
    std::set<std::string> fields;
    for (const auto& kv : parse_key_values(text)) {
        const auto k = resolve_key(kv.key);
        if (!k) throw ConfigError("line " + std::to_string(kv.line) + ": unknown config key '" + kv.key + "'");
        if (!fields.insert(k->field).second)
            throw ConfigError("line " + std::to_string(kv.line) + ": " + k->field + " set more than once");
        apply_value(c, *k, parse_number(kv.value, kv.key));
    }
    require_valid(c);
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

NetworkConfig load_config(const std::string& path) {
    if (path.empty()) return NetworkConfig::defaults();
    return parse_config(read_file(path));
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(std::ostream& os, const Table& t, const RunInfo& info) {
    os << "# covert_cli " << kToolVersion << " command=" << info.command << " config_hash=" << hex64(info.config_hash)
       << " seed=" << info.seed << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

void write_outputs(const std::string& path, const Table& t, const RunInfo& info, int exit_code,
                   std::ostream& fallback) {
    if (path.empty()) {
        write_csv(fallback, t, info);
        return;
    }
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        write_csv(out, t, info);
    }
    nlohmann::json meta{{"tool", "covert_cli"},
                        {"version", kToolVersion},
                        {"command", info.command},
                        {"config_hash", hex64(info.config_hash)},
                        {"seed", info.seed},
                        {"params", info.params},
                        {"columns", t.columns},
                        {"rows", t.rows.size()},
                        {"exit_code", exit_code}};
    std::ofstream side(path + ".meta.json", std::ios::binary);
    if (!side) throw std::runtime_error("cannot write '" + path + ".meta.json'");
    side << meta.dump(2) << '\n';
}

std::vector<mc::MetricKind> parse_kinds(std::string_view list) {
    std::vector<mc::MetricKind> out;
    for (const auto& item : split_list(list)) {
        try {
            out.push_back(mc::parse_metric_kind(item));
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

Result run_validate(const ValidateOptions& o) {
    const NetworkConfig c = load_config(o.config_path);
    const double p_s = dbm_to_mw(o.p_s_dbm);
    Result r;
    r.info.command = "validate";
    r.info.config_hash = config_hash(c);
    r.info.seed = o.seed;
    r.info.params = {{"p_s_dbm", o.p_s_dbm},
                     {"trials", o.trials},
                     {"grid", o.grid},
                     {"window_radius_m", mc::default_window_radius(p_s, c)},
                     {"config", config_json(c)}};
    r.table.columns = {"kind", "x", "analytic", "monte_carlo", "ci_halfwidth", "tolerance", "pass"};
    int failures = 0;
    for (const auto& v : validation_rows(c, p_s, o.kinds, o.trials, o.seed, o.grid, o.workers)) {
        r.table.rows.push_back({std::string(mc::to_string(v.kind)), fmt(v.x), fmt(v.analytic), fmt(v.mc), fmt(v.ci),
                                fmt(v.tol), v.pass ? "1" : "0"});
        if (!v.pass) ++failures;
    }
    r.diagnostics.push_back(std::to_string(r.table.rows.size() - static_cast<std::size_t>(failures)) + "/" +
                            std::to_string(r.table.rows.size()) + " points within tolerance");
    r.exit_code = failures ? kValidationFailure : kOk;
    return r;
}

Result run_lower_stage(const LowerStageOptions& o) {
    const NetworkConfig c = load_config(o.config_path);
    const double p_s = dbm_to_mw(o.p_s_dbm);
    if (o.grid < 2) throw ConfigError("lower-stage grid needs at least 2 points");
    const double lo = o.tau_min.value_or(c.noise_adv * (1.0 + 1e-9));
    if (!(lo > c.noise_adv))
        throw DomainError("tau grid must start above noise_adv = " + fmt(c.noise_adv) +
                          " mW; the adversary's threshold is undefined below the noise floor");
    const LowerStageSolution sol = best_response_tau(p_s, c);
    const double hi = o.tau_max.value_or(std::max(2.0 * sol.bracket_hi, 4.0 * sol.tau_star));
    if (!(hi > lo)) throw DomainError("tau grid must end above its start");

    Result r;
    r.info.command = "lower-stage";
    r.info.config_hash = config_hash(c);
    r.info.params = {{"p_s_dbm", o.p_s_dbm}, {"grid", o.grid}, {"tau_min_mw", lo}, {"tau_max_mw", hi},
                     {"config", config_json(c)}};
    r.table.columns = {"row", "tau_mw", "detection_error", "false_alarm", "miss_detection"};
    double best = 2.0, best_tau = lo;
    for (double t : linspace(lo, hi, o.grid)) {
        const double fa = fa_prob(p_s, t, c), md = md_prob(p_s, t, c), d = detection_error(p_s, t, c);
        if (d < best) {
            best = d;
            best_tau = t;
        }
        r.table.rows.push_back({"grid", fmt(t), fmt(d), fmt(fa), fmt(md)});
    }
    r.table.rows.push_back({"grid_argmin", fmt(best_tau), fmt(best), "", ""});
    r.table.rows.push_back({sol.degenerate ? "optimum_degenerate" : "optimum", fmt(sol.tau_star), fmt(sol.error_star),
                            fmt(fa_prob(p_s, sol.tau_star, c)), fmt(md_prob(p_s, sol.tau_star, c))});
    return r;
}

Result run_equilibrium(const EquilibriumOptions& o) {
    const NetworkConfig c = load_config(o.config_path);
    GaSpec ga;
    ga.seed = o.seed;
    ga.population = o.population;
    ga.generations = o.generations;
    ga.workers = std::max(1u, o.workers);
    check(ga);

    Result r;
    r.info.command = "equilibrium";
    r.info.config_hash = config_hash(c);
    r.info.seed = o.seed;
    r.info.params = {{"solver", o.grid_solver ? "grid" : "ga"}, {"population", o.population},
                     {"generations", o.generations}, {"grid", o.grid}, {"config", config_json(c)}};
    r.table.columns = {"scheme", "status"};
    r.table.columns.insert(r.table.columns.end(), kEquilibriumColumns.begin(), kEquilibriumColumns.end());
    r.table.columns.push_back("evaluations");
    for (Scheme s : o.schemes) {
        std::vector<std::string> row{std::string(to_string(s))};
        try {
            const auto e = solve_one(s, c, o.grid_solver, o.grid, ga);
            row.push_back("ok");
            for (auto& cell : equilibrium_cells(e)) row.push_back(cell);
            row.push_back(std::to_string(e.evaluations));
        } catch (const InfeasibleError& e) {
            row.push_back("infeasible");
            for (auto& cell : infeasible_cells(e)) row.push_back(cell);
            row.push_back("");
            std::string msg = std::string(e.what());
            if (e.slacks().size() == 2)
                msg += " (least violation: slack_power=" + fmt(e.slacks()[0]) +
                       ", slack_covert=" + fmt(e.slacks()[1]) + ")";
            r.diagnostics.push_back(msg);
            r.exit_code = kInfeasible;
        }
        r.table.rows.push_back(std::move(row));
    }
    if (o.grid > 0 && !o.grid_solver) {
        Table surf;
        surf.columns = {"scheme", "p_s_dbm", "rho", "utility", "slack_power", "slack_covert", "feasible"};
        const auto dbs = linspace(mw_to_dbm(c.ps_min), mw_to_dbm(c.ps_max), o.grid);
        const auto rhos = linspace(c.rho_min, 1.0, o.grid);
        for (Scheme s : o.schemes) {
            for (double db : dbs) {
                const double p_s = dbm_to_mw(db);
                const double covert = best_response_tau(p_s, c).error_star - (1.0 - c.eps_covert);
                for (double rho : rhos) {
                    const Strategy st{s, p_s, rho};
                    const double power = ph_prob(st, c) - (1.0 - c.eps_power);
                    surf.rows.push_back({std::string(to_string(s)), fmt(db), fmt(rho), fmt(network_utility(st, c)),
                                         fmt(power), fmt(covert), power >= 0 && covert >= 0 ? "1" : "0"});
                }
            }
        }
        r.surface = std::move(surf);
    }
    return r;
}

SweepSpec parse_sweep_spec(std::string_view text, const std::string& base_dir) {
    SweepSpec s;
    bool have_field = false, have_values = false;
    for (const auto& kv : parse_key_values(text)) {
        const std::string where = "line " + std::to_string(kv.line) + ": ";
        if (kv.key == "config") {
            std::filesystem::path p(kv.value);
            s.config_path = (p.is_relative() && !base_dir.empty()) ? (std::filesystem::path(base_dir) / p).string()
                                                                   : kv.value;
        } else if (kv.key == "field") {
            s.field = kv.value;
            have_field = true;
        } else if (kv.key == "values") {
            for (const auto& item : split_list(kv.value)) s.values.push_back(parse_number(item, "values"));
            have_values = true;
        } else if (kv.key == "task") {
            if (kv.value == "equilibrium") s.task = SweepTask::Equilibrium;
            else if (kv.value == "lower-stage") s.task = SweepTask::LowerStage;
            else if (kv.value == "validate") s.task = SweepTask::Validate;
            else throw ConfigError(where + "task must be equilibrium, lower-stage or validate");
        } else if (kv.key == "schemes") {
            s.schemes = parse_schemes(kv.value);
        } else if (kv.key == "out") {
            s.out = kv.value;
        } else if (kv.key == "solver") {
            if (kv.value != "ga" && kv.value != "grid") throw ConfigError(where + "solver must be ga or grid");
            s.grid_solver = kv.value == "grid";
        } else if (kv.key == "grid") {
            const double g = parse_number(kv.value, "grid");
            if (g < 2 || g != std::floor(g)) throw ConfigError(where + "grid must be an integer >= 2");
            s.grid = static_cast<int>(g);
        } else if (kv.key == "p_s_dbm") {
            s.p_s_dbm = parse_number(kv.value, "p_s_dbm");
        } else if (kv.key == "trials") {
            const double t = parse_number(kv.value, "trials");
            if (t < 0 || t != std::floor(t)) throw ConfigError(where + "trials must be a nonnegative integer");
            s.trials = static_cast<std::uint64_t>(t);
        } else if (kv.key == "kinds") {
            try {
                s.kinds = parse_kinds(kv.value);
            } catch (const UsageError& e) {
                throw ConfigError(where + e.what());
            }
        } else if (kv.key.rfind("override.", 0) == 0) {
            KeyValue o = kv;
            o.key = kv.key.substr(9);
            if (!resolve_key(o.key)) throw ConfigError(where + "unknown override key '" + o.key + "'");
            s.overrides.push_back(std::move(o));
        } else {
            throw ConfigError(where + "unknown sweep key '" + kv.key + "'");
        }
    }
    if (!have_field) throw ConfigError("sweep spec needs a field");
    if (!have_values || s.values.empty()) throw ConfigError("sweep values list is empty");
    if (is_strategy_power(s.field)) {
        if (s.task == SweepTask::Equilibrium)
            throw ConfigError("p_s is chosen by the equilibrium and cannot be swept for that task");
    } else if (!resolve_key(s.field)) {
        throw ConfigError("sweep field '" + s.field + "' is neither a config field nor p_s");
    }
    return s;
}

Result run_sweep(const SweepOptions& o, const SweepSpec& spec) {
    NetworkConfig base = load_config(spec.config_path);
    for (const auto& kv : spec.overrides) apply_setting(base, kv.key, kv.value);
    require_valid(base);
    const std::uint64_t trials = o.trials.value_or(spec.trials);

    struct Point {
        NetworkConfig config;
        double p_s;
    };
    std::vector<Point> points;
    for (double v : spec.values) {
        Point p{base, dbm_to_mw(spec.p_s_dbm)};
        if (is_strategy_power(spec.field))
            p.p_s = spec.field == "p_s_dbm" ? dbm_to_mw(v) : v;
        else
            apply_value(p.config, *resolve_key(spec.field), v);
        require_valid(p.config);
        if (!(p.p_s > 0.0)) throw ConfigError("p_s must be positive");
        points.push_back(p);
    }

    Result r;
    r.info.command = "sweep";
    r.info.config_hash = config_hash(base);
    r.info.seed = o.seed;
    const char* task_name = spec.task == SweepTask::Equilibrium ? "equilibrium"
                            : spec.task == SweepTask::LowerStage ? "lower-stage"
                                                                 : "validate";
    r.info.params = {{"field", spec.field},   {"values", spec.values}, {"task", task_name},
                     {"solver", spec.grid_solver ? "grid" : "ga"}, {"grid", spec.grid},
                     {"trials", trials},      {"config", config_json(base)}};
    r.table.columns = {"index", "field", "value"};
    switch (spec.task) {
        case SweepTask::Equilibrium:
            r.table.columns.insert(r.table.columns.end(), {"scheme", "status"});
            r.table.columns.insert(r.table.columns.end(), kEquilibriumColumns.begin(), kEquilibriumColumns.end());
            break;
        case SweepTask::LowerStage:
            r.table.columns.insert(r.table.columns.end(),
                                   {"status", "p_s_mw", "tau_star_mw", "error_star", "degenerate"});
            break;
        case SweepTask::Validate:
            r.table.columns.insert(r.table.columns.end(),
                                   {"kind", "x", "analytic", "monte_carlo", "ci_halfwidth", "tolerance", "pass"});
            break;
    }

    struct Outcome {
        std::vector<std::vector<std::string>> rows;
        int exit_code = kOk;
        std::vector<std::string> notes;
        std::exception_ptr error;
    };
    std::vector<Outcome> outcomes(points.size());

    auto run_point = [&](std::size_t i) {
        const Point& p = points[i];
        Outcome& out = outcomes[i];
        const std::vector<std::string> prefix{std::to_string(i), spec.field, fmt(spec.values[i])};
        auto row = [&](std::vector<std::string> tail) {
            auto full = prefix;
            full.insert(full.end(), tail.begin(), tail.end());
            out.rows.push_back(std::move(full));
        };
        const std::uint64_t seed = mc::stream_seed(o.seed, i);
        switch (spec.task) {
            case SweepTask::Equilibrium: {
                GaSpec ga;
                ga.seed = seed;
                for (Scheme s : spec.schemes) {
                    std::vector<std::string> tail{std::string(to_string(s))};
                    try {
                        const auto e = solve_one(s, p.config, spec.grid_solver, spec.grid, ga);
                        tail.push_back("ok");
                        for (auto& cell : equilibrium_cells(e)) tail.push_back(cell);
                    } catch (const InfeasibleError& e) {
                        tail.push_back("infeasible");
                        for (auto& cell : infeasible_cells(e)) tail.push_back(cell);
                    } catch (const MaxIterationsError& e) {
                        tail.push_back("nonconvergence");
                        tail.resize(r.table.columns.size() - prefix.size());
                        out.exit_code = kNonconvergence;
                        out.notes.push_back(e.what());
                    } catch (const BracketingError& e) {
                        tail.push_back("nonconvergence");
                        tail.resize(r.table.columns.size() - prefix.size());
                        out.exit_code = kNonconvergence;
                        out.notes.push_back(e.what());
                    }
                    row(std::move(tail));
                }
                break;
            }
            case SweepTask::LowerStage: {
                const auto sol = best_response_tau(p.p_s, p.config);
                row({"ok", fmt(p.p_s), fmt(sol.tau_star), fmt(sol.error_star), sol.degenerate ? "1" : "0"});
                break;
            }
            case SweepTask::Validate: {
                for (const auto& v : validation_rows(p.config, p.p_s, spec.kinds, trials, seed, 0, 1)) {
                    row({std::string(mc::to_string(v.kind)), fmt(v.x), fmt(v.analytic), fmt(v.mc), fmt(v.ci),
                         fmt(v.tol), v.pass ? "1" : "0"});
                    if (!v.pass) out.exit_code = kValidationFailure;
                }
                break;
            }
        }
    };

    unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, points.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
            try {
                run_point(i);
            } catch (...) {
                outcomes[i].error = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& out : outcomes) {
        if (out.error) std::rethrow_exception(out.error);
        for (auto& row : out.rows) r.table.rows.push_back(std::move(row));
        for (auto& n : out.notes) r.diagnostics.push_back(std::move(n));
        r.exit_code = std::max(r.exit_code, out.exit_code);
    }
    return r;
}

namespace {

int emit(const Result& r, const std::string& out_path, const std::string& surface_path, std::ostream& out,
         std::ostream& err) {
    write_outputs(out_path, r.table, r.info, r.exit_code, out);
    if (r.surface && !surface_path.empty()) write_outputs(surface_path, *r.surface, r.info, r.exit_code, out);
    for (const auto& d : r.diagnostics) err << d << '\n';
    return r.exit_code;
}

}  // namespace

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Covert SWIPT D2D network: analytic metrics, Monte Carlo checks and Stackelberg equilibria",
                 "covert_cli"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string config, out_path, surface_path, kinds, scheme = "PS", solver = "ga", spec_path;
    std::uint64_t seed = 1, trials = 100000;
    double p_s_dbm = 10.0;
    int grid = 0, population = 60, generations = 120;
    unsigned workers = 0, jobs = 0;
    double tau_min = 0.0, tau_max = 0.0;

    auto* v = app.add_subcommand("validate", "Compare analytic metrics with Monte Carlo estimates");
    v->add_option("--config", config, "Config file (key = value)");
    v->add_option("--seed", seed, "Random seed");
    v->add_option("--trials", trials, "Monte Carlo trials");
    v->add_option("--kinds", kinds, "Comma separated metric kinds (default: all six link and detection metrics)");
    v->add_option("--p-s-dbm", p_s_dbm, "Transmit power in dBm");
    v->add_option("--grid", grid, "Points per metric grid (default 10 rho, 20 tau)");
    v->add_option("--workers", workers, "Simulation threads (0: hardware concurrency)");
    v->add_option("--out", out_path, "Output CSV (default stdout)");

    auto* l = app.add_subcommand("lower-stage", "Detection error curve and the adversary's best threshold");
    l->add_option("--config", config, "Config file");
    l->add_option("--p-s-dbm", p_s_dbm, "Transmit power in dBm");
    auto* grid_l = l->add_option("--grid", grid, "Number of tau grid points (default 200)");
    auto* tmin = l->add_option("--tau-min", tau_min, "First tau in mW");
    auto* tmax = l->add_option("--tau-max", tau_max, "Last tau in mW");
    l->add_option("--out", out_path, "Output CSV");

    auto* e = app.add_subcommand("equilibrium", "Leader's constrained optimum for each scheme");
    e->add_option("--config", config, "Config file");
    e->add_option("--scheme", scheme, "PS, TS or both");
    e->add_option("--seed", seed, "GA seed");
    e->add_option("--population", population, "GA population");
    e->add_option("--generations", generations, "GA generations");
    e->add_option("--solver", solver, "ga or grid")->check(CLI::IsMember({"ga", "grid"}));
    e->add_option("--grid", grid, "Grid size for the grid solver, or of the utility surface with the GA");
    e->add_option("--surface", surface_path, "Utility surface CSV (needs --grid)");
    e->add_option("--workers", workers, "GA evaluation threads");
    e->add_option("--out", out_path, "Output CSV");

    auto* s = app.add_subcommand("sweep", "Run a sweep spec file");
    s->add_option("spec,--spec", spec_path, "Sweep spec file")->required();
    s->add_option("--seed", seed, "Base seed; point i uses a stream derived from it");
    auto* trials_s = s->add_option("--trials", trials, "Monte Carlo trials for validate sweeps");
    s->add_option("--jobs", jobs, "Concurrent sweep points (0: hardware concurrency)");
    s->add_option("--out", out_path, "Output CSV (overrides the spec's out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (v->parsed()) {
            ValidateOptions o;
            o.config_path = config;
            o.kinds = parse_kinds(kinds);
            o.trials = trials;
            o.seed = seed;
            o.p_s_dbm = p_s_dbm;
            o.grid = grid;
            o.workers = workers;
            return emit(run_validate(o), out_path, "", out, err);
        }
        if (l->parsed()) {
            LowerStageOptions o;
            o.config_path = config;
            o.p_s_dbm = p_s_dbm;
            if (grid_l->count()) o.grid = grid;
            if (tmin->count()) o.tau_min = tau_min;
            if (tmax->count()) o.tau_max = tau_max;
            return emit(run_lower_stage(o), out_path, "", out, err);
        }
        if (e->parsed()) {
            EquilibriumOptions o;
            o.config_path = config;
            try {
                o.schemes = parse_schemes(scheme);
            } catch (const ConfigError& ex) {
                throw UsageError(ex.what());
            }
            o.seed = seed;
            o.population = population;
            o.generations = generations;
            o.grid_solver = solver == "grid";
            o.grid = grid;
            o.workers = workers;
            if (!surface_path.empty() && (grid <= 0 || o.grid_solver))
                throw UsageError("--surface needs --grid with the ga solver");
            return emit(run_equilibrium(o), out_path, surface_path, out, err);
        }
        if (s->parsed()) {
            const auto spec = parse_sweep_spec(read_file(spec_path),
                                               std::filesystem::path(spec_path).parent_path().string());
            SweepOptions o;
            o.spec_path = spec_path;
            o.seed = seed;
            if (trials_s->count()) o.trials = trials;
            o.jobs = jobs;
            return emit(run_sweep(o, spec), out_path.empty() ? spec.out : out_path, "", out, err);
        }
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return kUsage;
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kValidationFailure;
    } catch (const DomainError& ex) {
        err << "domain error: " << ex.what() << '\n';
        return kValidationFailure;
    } catch (const InfeasibleError& ex) {
        err << "infeasible: " << ex.what() << '\n';
        return kInfeasible;
    } catch (const QuadratureError& ex) {
        err << "nonconvergence: " << ex.what() << '\n';
        return kNonconvergence;
    } catch (const MaxIterationsError& ex) {
        err << "nonconvergence: " << ex.what() << '\n';
        return kNonconvergence;
    } catch (const BracketingError& ex) {
        err << "nonconvergence: " << ex.what() << '\n';
        return kNonconvergence;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace covert::cli
