#pragma once

// Flat key=value experiment configuration and the runner behind the CLI.
//
//   # comment
//   example=ex1
//   stages=10,20,100,1000
//   mesh=100
//
// Every output file starts with one '#' line holding the normalized config.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "starhomog/analysis.hpp"
#include "starhomog/detail/random.hpp"
#include "starhomog/errors.hpp"
#include "starhomog/femsolve.hpp"
#include "starhomog/forcing.hpp"
#include "starhomog/stargraph.hpp"
#include "starhomog/upscale.hpp"

namespace starhomog {

enum class Emit { table, cauchy, solution, weyl, identity, upscaled, rate };
enum class ReferenceKind { oracle, upscaled, printed };
enum class CoefficientMode { deterministic, random, uniform };

/// h^n = value, or h^n = value * n when per_n is set.
struct CenterDatumRule {
    double value = 0.0;
    bool per_n = false;

    double at(std::size_t n) const { return per_n ? value * static_cast<double>(n) : value; }
    /// lim h^n / n.
    double limit() const { return per_n ? value : 0.0; }
};

struct ExperimentConfig {
    std::string example;
    FieldParameters params;
    std::vector<std::size_t> stages{10, 20, 100, 1000};
    std::vector<std::size_t> centers{10, 20, 100, 1000};
    std::size_t mesh = 100;
    CoefficientMode coeff = CoefficientMode::deterministic;
    std::vector<double> probs{1.0 / 3.0, 2.0 / 3.0};
    double kvalue = 1.0;
    std::uint64_t seed = 0;
    CenterDatumRule h;
    ReferenceKind reference = ReferenceKind::oracle;
    std::string out;
    Emit emit = Emit::table;
    std::size_t window = 10;
    std::size_t n = 10;
    double interval_lo = 0.0;
    double interval_hi = std::numbers::pi;
    H1Kind h1 = H1Kind::seminorm;
    std::size_t quad = 3;
    bool resample = true;
    bool timing = false;
    std::size_t threads = 1;
};

inline std::string_view to_string(Emit e) {
    switch (e) {
    case Emit::table: return "table";
    case Emit::cauchy: return "cauchy";
    case Emit::solution: return "solution";
    case Emit::weyl: return "weyl";
    case Emit::identity: return "identity";
    case Emit::upscaled: return "upscaled";
    case Emit::rate: return "rate";
    }
    return "";
}

inline std::optional<Emit> emit_from_string(std::string_view s) {
    for (Emit e : {Emit::table, Emit::cauchy, Emit::solution, Emit::weyl, Emit::identity,
                   Emit::upscaled, Emit::rate})
        if (to_string(e) == s) return e;
    return std::nullopt;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto comma = s.find(',');
        parts.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return parts;
}

/// Decimal number, optionally followed by "pi" ("pi", "2pi", "-0.5pi").
inline double parse_real(std::string_view s, std::size_t line, std::string_view key) {
    s = trim(s);
    double scale = 1.0;
    if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
        scale = std::numbers::pi;
        s.remove_suffix(2);
        if (s.empty() || s == "+") return scale;
        if (s == "-") return -scale;
    }
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(value))
        throw ParseError(line, "malformed number for '" + std::string(key) + "'");
    return value * scale;
}

inline std::uint64_t parse_unsigned(std::string_view s, std::size_t line, std::string_view key) {
    s = trim(s);
    std::uint64_t value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(line, "malformed unsigned integer for '" + std::string(key) + "'");
    return value;
}

inline std::vector<std::size_t> parse_index_list(std::string_view s, std::size_t line,
                                                 std::string_view key) {
    std::vector<std::size_t> out;
    for (auto part : split_list(s)) out.push_back(parse_unsigned(part, line, key));
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1])
            throw ParseError(line, "'" + std::string(key) + "' must be strictly increasing");
    if (out.empty()) throw ParseError(line, "'" + std::string(key) + "' must not be empty");
    return out;
}

inline bool parse_flag(std::string_view s, std::size_t line, std::string_view key) {
    s = trim(s);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ParseError(line, "'" + std::string(key) + "' expects true/false");
}

inline std::string format_real(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

template <class T>
std::string join(const std::vector<T>& values, const char* sep = ",") {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? sep : "") << values[i];
    return out.str();
}

} // namespace detail

/// Applies one key=value pair. `line` is the source line (0 for command-line overrides).
inline void set_config_key(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                           std::size_t line) {
    using namespace detail;
    value = trim(value);
    if (key == "example") {
        if (value.empty()) throw ParseError(line, "'example' must not be empty");
        cfg.example = std::string(value);
    } else if (key == "stages") {
        cfg.stages = parse_index_list(value, line, key);
    } else if (key == "centers") {
        cfg.centers = parse_index_list(value, line, key);
    } else if (key == "mesh") {
        cfg.mesh = parse_unsigned(value, line, key);
        if (cfg.mesh < 2) throw ParseError(line, "'mesh' must be >= 2");
    } else if (key == "coeff") {
        if (value == "deterministic") cfg.coeff = CoefficientMode::deterministic;
        else if (value == "random") cfg.coeff = CoefficientMode::random;
        else if (value == "uniform") cfg.coeff = CoefficientMode::uniform;
        else throw ParseError(line, "'coeff' must be deterministic, random or uniform");
    } else if (key == "probs") {
        std::vector<double> probs;
        for (auto part : split_list(value)) probs.push_back(parse_real(part, line, key));
        try {
            check_probabilities(probs);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line, e.what());
        }
        cfg.probs = std::move(probs);
    } else if (key == "kvalue") {
        cfg.kvalue = parse_real(value, line, key);
        if (!(cfg.kvalue > 0.0)) throw ParseError(line, "'kvalue' must be > 0");
    } else if (key == "seed") {
        cfg.seed = parse_unsigned(value, line, key);
    } else if (key == "h") {
        CenterDatumRule rule;
        if (value.size() >= 2 && value.substr(value.size() - 2) == "*n") {
            rule.per_n = true;
            value.remove_suffix(2);
        }
        rule.value = parse_real(value, line, key);
        cfg.h = rule;
    } else if (key == "reference") {
        if (value == "oracle") cfg.reference = ReferenceKind::oracle;
        else if (value == "upscaled") cfg.reference = ReferenceKind::upscaled;
        else if (value == "printed") cfg.reference = ReferenceKind::printed;
        else throw ParseError(line, "'reference' must be oracle, upscaled or printed");
    } else if (key == "out") {
        cfg.out = std::string(value);
    } else if (key == "emit") {
        const auto e = emit_from_string(value);
        if (!e) throw ParseError(line, "unknown 'emit' value '" + std::string(value) + "'");
        cfg.emit = *e;
    } else if (key == "window") {
        cfg.window = parse_unsigned(value, line, key);
        if (cfg.window < 2 || cfg.window % 2) throw ParseError(line, "'window' must be even and >= 2");
    } else if (key == "n") {
        cfg.n = parse_unsigned(value, line, key);
        if (cfg.n < 1) throw ParseError(line, "'n' must be >= 1");
    } else if (key == "interval") {
        const auto parts = split_list(value);
        if (parts.size() != 2) throw ParseError(line, "'interval' expects two numbers c,d");
        cfg.interval_lo = parse_real(parts[0], line, key);
        cfg.interval_hi = parse_real(parts[1], line, key);
        if (!(cfg.interval_lo >= 0.0 && cfg.interval_hi > cfg.interval_lo &&
              cfg.interval_hi <= two_pi))
            throw ParseError(line, "'interval' must satisfy 0 <= c < d <= 2pi");
    } else if (key == "h1") {
        if (value == "seminorm") cfg.h1 = H1Kind::seminorm;
        else if (value == "full") cfg.h1 = H1Kind::full;
        else throw ParseError(line, "'h1' must be seminorm or full");
    } else if (key == "quad") {
        cfg.quad = parse_unsigned(value, line, key);
        if (cfg.quad < 1 || cfg.quad > 64) throw ParseError(line, "'quad' must be in [1, 64]");
    } else if (key == "resample") {
        cfg.resample = parse_flag(value, line, key);
    } else if (key == "timing") {
        cfg.timing = parse_flag(value, line, key);
    } else if (key == "threads") {
        cfg.threads = parse_unsigned(value, line, key);
        if (cfg.threads < 1) throw ParseError(line, "'threads' must be >= 1");
    } else if (key == "c" || key == "amplitude" || key == "k" || key == "from_rim") {
        cfg.params[std::string(key)] = parse_real(value, line, key);
    } else {
        throw ParseError(line, "unknown key '" + std::string(key) + "'");
    }
}

/// Checks cross-key constraints; `line` is reported for errors not tied to a key.
inline void validate_config(const ExperimentConfig& cfg, std::size_t line) {
    if (cfg.example.empty()) throw ParseError(line, "missing required key 'example'");
    try {
        (void)builtin_field(cfg.example, cfg.params, cfg.seed);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
    }
}

inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty() || line_no == 0) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
        set_config_key(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1), line_no);
    }
    validate_config(cfg, line_no);
    return cfg;
}

/// Canonical one-line rendering of every setting, echoed into outputs.
inline std::string normalized_config(const ExperimentConfig& cfg) {
    using detail::format_real;
    std::ostringstream out;
    out << "example=" << cfg.example;
    for (const auto& [k, v] : cfg.params) out << ';' << k << '=' << format_real(v);
    out << ";emit=" << to_string(cfg.emit) << ";stages=" << detail::join(cfg.stages)
        << ";centers=" << detail::join(cfg.centers) << ";mesh=" << cfg.mesh << ";coeff="
        << (cfg.coeff == CoefficientMode::deterministic ? "deterministic"
            : cfg.coeff == CoefficientMode::random      ? "random"
                                                        : "uniform")
        << ";probs=" << detail::join(cfg.probs) << ";kvalue=" << format_real(cfg.kvalue)
        << ";seed=" << cfg.seed << ";prng=" << detail::prng_name
        << ";h=" << format_real(cfg.h.value) << (cfg.h.per_n ? "*n" : "") << ";reference="
        << (cfg.reference == ReferenceKind::oracle     ? "oracle"
            : cfg.reference == ReferenceKind::upscaled ? "upscaled"
                                                       : "printed")
        << ";window=" << cfg.window << ";n=" << cfg.n << ";interval=" << format_real(cfg.interval_lo)
        << ',' << format_real(cfg.interval_hi) << ";h1="
        << (cfg.h1 == H1Kind::seminorm ? "seminorm" : "full") << ";quad=" << cfg.quad
        << ";resample=" << (cfg.resample ? "true" : "false");
    if (cfg.timing) out << ";timing=true";
    return out.str();
}

inline CoefficientRule coefficient_rule(const ExperimentConfig& cfg) {
    switch (cfg.coeff) {
    case CoefficientMode::deterministic: return CoefficientRule::deterministic();
    case CoefficientMode::random: return CoefficientRule::random(cfg.seed, cfg.probs);
    case CoefficientMode::uniform: return CoefficientRule::uniform(cfg.kvalue);
    }
    return CoefficientRule::deterministic();
}

/// Field at stage n. With resample, ex2 draws a fresh realization per stage.
inline ForcingField field_for_stage(const ExperimentConfig& cfg, std::size_t n) {
    FieldParameters params = cfg.params;
    if (cfg.example == "ex2" && cfg.resample) params["realization"] = static_cast<double>(n);
    return builtin_field(cfg.example, params, cfg.seed);
}

inline StageProblem stage_problem(const ExperimentConfig& cfg) {
    StageProblem p;
    p.id = cfg.example;
    p.coefficients = coefficient_rule(cfg);
    p.field = [cfg](std::size_t n) { return field_for_stage(cfg, n); };
    p.h = [rule = cfg.h](std::size_t n) { return rule.at(n); };
    if (cfg.coeff == CoefficientMode::random || cfg.example == "ex2") p.seed = cfg.seed;
    return p;
}

inline UpscaledProblem upscaled_problem(const ExperimentConfig& cfg) {
    return make_upscaled_problem(coefficient_rule(cfg), builtin_field(cfg.example, cfg.params, cfg.seed),
                                 cfg.h.limit());
}

inline SolverOptions solver_options(const ExperimentConfig& cfg) {
    return {cfg.quad, cfg.threads};
}

struct GroupReference {
    std::string id;
    std::vector<GridFunction> groups;
};

/// Per-group reference functions on mesh m, per cfg.reference.
inline GroupReference group_reference(const ExperimentConfig& cfg, std::size_t m) {
    const auto problem = upscaled_problem(cfg);
    if (cfg.reference == ReferenceKind::upscaled)
        return {"upscaled", solve_upscaled(problem, m, solver_options(cfg)).groups};
    const auto orientation =
        cfg.params.contains("from_rim") && cfg.params.at("from_rim") == 1.0 ? Orientation::rim_in
                                                                           : Orientation::center_out;
    const auto entry = analytic_oracle(cfg.example, problem, orientation);
    if (!entry) throw std::invalid_argument("no closed-form reference registered for '" + cfg.example + "'");
    const bool printed = cfg.reference == ReferenceKind::printed;
    const auto& fns = printed ? entry->printed : entry->best();
    GroupReference ref{(printed ? "printed:" : "oracle:") + cfg.example, {}};
    for (const auto& f : fns) ref.groups.push_back(GridFunction::sample(m, f));
    return ref;
}

/// Writes through a temporary file and renames it into place.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path path)
        : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
        if (path_.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(path_.parent_path(), ec);
            if (ec) throw IoError("cannot create directory " + path_.parent_path().string() + ": " + ec.message());
        }
        stream_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!stream_) throw IoError("cannot open " + tmp_.string() + " for writing");
    }
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;
    ~AtomicFile() {
        if (!committed_) {
            stream_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

    std::ostream& stream() { return stream_; }

    void commit() {
        stream_.flush();
        if (!stream_) throw IoError("write failed for " + tmp_.string());
        stream_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, path_, ec);
        if (ec) throw IoError("cannot rename " + tmp_.string() + " to " + path_.string() + ": " + ec.message());
        committed_ = true;
    }

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream stream_;
    bool committed_ = false;
};

/// Environment variable that redirects relative output paths.
inline constexpr const char* output_dir_env = "STARHOMOG_OUT_DIR";

inline std::filesystem::path output_path(const ExperimentConfig& cfg) {
    std::filesystem::path p = cfg.out.empty()
        ? std::filesystem::path(std::string(to_string(cfg.emit)) + "_" + cfg.example + ".csv")
        : std::filesystem::path(cfg.out);
    if (const char* dir = std::getenv(output_dir_env); dir && *dir && p.is_relative())
        p = std::filesystem::path(dir) / p;
    return p;
}

namespace detail {

inline void run_table(const ExperimentConfig& cfg, std::ostream& out) {
    const auto ref = group_reference(cfg, cfg.mesh);
    const auto rows = convergence_table(stage_problem(cfg), cfg.stages, cfg.mesh, ref.groups, ref.id,
                                        {cfg.h1, solver_options(cfg)});
    write_table_csv(out, rows, cfg.timing);
}

inline void run_cauchy(const ExperimentConfig& cfg, std::ostream& out) {
    const auto rows = cauchy_diagnostics(stage_problem(cfg), cfg.centers, cfg.window, cfg.mesh,
                                         {cfg.h1, solver_options(cfg)});
    write_cauchy_csv(out, rows);
}

inline void run_solution(const ExperimentConfig& cfg, std::ostream& out) {
    const auto stage = build_stage(cfg.n, coefficient_rule(cfg));
    const auto sol = solve_stage(stage, field_for_stage(cfg, cfg.n), cfg.h.at(cfg.n), cfg.mesh,
                                 solver_options(cfg));
    write_solution_csv(out, sol);
}

inline void run_weyl(const ExperimentConfig& cfg, std::ostream& out) {
    const double fraction = weyl_fraction(cfg.n, cfg.interval_lo, cfg.interval_hi);
    out << "n,c,d,fraction,expected\n"
        << cfg.n << ',' << csv_number(cfg.interval_lo) << ',' << csv_number(cfg.interval_hi) << ','
        << csv_number(fraction) << ',' << csv_number((cfg.interval_hi - cfg.interval_lo) / two_pi)
        << '\n';
}

inline void run_identity(const ExperimentConfig& cfg, std::ostream& out) {
    out << "n,m,center_value,center_residual,flux_balance,solver_residual\n";
    const auto rule = coefficient_rule(cfg);
    const auto opts = solver_options(cfg);
    std::vector<std::size_t> stages = cfg.stages;
    for (std::size_t n : stages) {
        const auto stage = build_stage(n, rule);
        const auto field = field_for_stage(cfg, n);
        const double h = cfg.h.at(n);
        const auto sys = assemble(stage, field, h, cfg.mesh, opts);
        const auto sol = solve(sys, opts.threads);
        double flux = h;
        for (std::size_t e = 0; e < n; ++e) flux += edge_flux_at_center(sol, e);
        out << n << ',' << cfg.mesh << ',' << csv_number(sol.center_value) << ','
            << csv_number(center_identity_residual(sol, field, h, cfg.quad)) << ','
            << csv_number(flux) << ',' << csv_number(relative_residual(sys, sol)) << '\n';
    }
}

inline void run_upscaled(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
    const auto problem = upscaled_problem(cfg);
    const auto sol = solve_upscaled(problem, cfg.mesh, solver_options(cfg));
    log << "center_value " << csv_number(sol.center_value) << "\ncenter_limit "
        << csv_number(center_limit(problem)) << '\n';
    for (std::size_t i = 0; i < problem.groups(); ++i)
        log << "group " << i + 1 << " predicted_flux " << csv_number(predicted_edge_flux(problem, i))
            << " discrete_flux " << csv_number(sol.group_flux[i]) << '\n';
    out << "group,node_index,t,value\n";
    for (std::size_t i = 0; i < sol.groups.size(); ++i)
        for (std::size_t j = 0; j <= cfg.mesh; ++j)
            out << i + 1 << ',' << j << ',' << csv_number(sol.groups[i].t(j)) << ','
                << csv_number(sol.groups[i][j]) << '\n';
}

inline void run_rate(const ExperimentConfig& cfg, std::ostream& out) {
    const auto problem = stage_problem(cfg);
    StageCache cache(problem, cfg.mesh, solver_options(cfg));
    std::vector<std::size_t> stages;
    for (std::size_t c : cfg.centers) {
        if (c < 4) throw std::invalid_argument("rate: centers must be >= 4");
        for (std::size_t j = c - 2; j <= c + 1; ++j) stages.push_back(j);
    }
    cache.prefetch(stages);
    out << "n,group,alpha\n";
    for (std::size_t c : cfg.centers) {
        for (std::size_t g = 0; g < problem.coefficients.group_count(); ++g) {
            auto gap = [&](std::size_t j) {
                return grid_norms(cache.at(j).groups[g], cache.at(j - 1).groups[g]).l2;
            };
            out << c << ',' << g + 1 << ',';
            try {
                out << csv_number(rate_estimate(gap(c - 1), gap(c), gap(c + 1)));
            } catch (const UndefinedRate&) {
                out << "nan";
            }
            out << '\n';
        }
    }
}

} // namespace detail

/// Runs the configured experiment and writes its CSV atomically. Returns the
/// output path. Human-readable summaries go to `log`.
inline std::filesystem::path run(const ExperimentConfig& cfg, std::ostream& log) {
    validate_config(cfg, 0);
    const auto path = output_path(cfg);
    std::ostringstream body;
    switch (cfg.emit) {
    case Emit::table: detail::run_table(cfg, body); break;
    case Emit::cauchy: detail::run_cauchy(cfg, body); break;
    case Emit::solution: detail::run_solution(cfg, body); break;
    case Emit::weyl: detail::run_weyl(cfg, body); break;
    case Emit::identity: detail::run_identity(cfg, body); break;
    case Emit::upscaled: detail::run_upscaled(cfg, body, log); break;
    case Emit::rate: detail::run_rate(cfg, body); break;
    }
    AtomicFile file(path);
    file.stream() << "# starhomog " << to_string(cfg.emit) << ": " << normalized_config(cfg) << '\n'
                  << body.str();
    file.commit();
    return path;
}

} // namespace starhomog
