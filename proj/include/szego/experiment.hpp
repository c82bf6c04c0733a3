#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "szego/diagnostics.hpp"
#include "szego/errors.hpp"
#include "szego/measure.hpp"
#include "szego/operator.hpp"
#include "szego/spectral.hpp"
#include "szego/symbol_io.hpp"
#include "szego/version.hpp"

namespace szego {

/// Process exit codes of the experiment runner.
enum ExitCode : int {
  kExitPass = 0,
  kExitInvariantFailed = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitPositivity = 4,
  kExitCapExceeded = 5,
  kExitRuntime = 6,
};

struct ExperimentConfig {
  enum class Space { DruryArveson, Bergman };

  Space space = Space::DruryArveson;
  std::optional<double> bergman_a;
  std::size_t dimension = 0;
  std::vector<std::uint64_t> cutoffs;
  /// Symbol file path, resolved against the config file's directory.
  std::filesystem::path symbol_path;
  /// Inline symbol document (alternative to symbol_path).
  std::optional<nlohmann::json> symbol_inline;
  std::string test_function = "x";
  std::optional<std::vector<double>> polynomial;
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::uint64_t max_rank = AssemblyOptions::kDefaultMaxRank;
  double gap_tolerance = 0.05;
  double trend_tolerance = 0.02;
  HermitianMode hermitian = HermitianMode::AutoComplete;

  WeightFamily weights() const {
    if (space == Space::DruryArveson) return WeightFamily::drury_arveson(dimension);
    return WeightFamily::bergman(dimension, *bergman_a);
  }

  TestFunction function() const {
    if (polynomial) return TestFunction::from_polynomial(*polynomial, "polynomial");
    if (test_function == "log") return TestFunction::log();
    if (test_function == "x") return TestFunction::power(1);
    if (test_function.size() == 3 && test_function.starts_with("x^") && test_function[2] >= '1' &&
        test_function[2] <= '4') {
      return TestFunction::power(static_cast<unsigned>(test_function[2] - '0'));
    }
    throw PreconditionError("unknown test function '" + test_function + "'");
  }

  AssemblyOptions assembly() const {
    AssemblyOptions o;
    o.max_rank = max_rank;
    o.max_extended_rank = std::max<std::uint64_t>(GradedBasisIndexer::kDefaultRankCap, max_rank);
    return o;
  }

  SymbolFile load_symbol_file() const {
    SymbolFile file = symbol_inline ? symbol_from_json(*symbol_inline, "<inline symbol>", hermitian)
                                    : load_symbol(symbol_path, hermitian);
    if (file.symbol.dimension() != dimension) {
      throw PreconditionError("symbol dimension " + std::to_string(file.symbol.dimension()) +
                              " differs from config dimension " + std::to_string(dimension));
    }
    return file;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["space"] = space == Space::DruryArveson ? "drury-arveson" : "bergman";
    if (bergman_a) j["bergman_a"] = *bergman_a;
    j["dimension"] = dimension;
    j["cutoffs"] = cutoffs;
    if (symbol_inline) {
      j["symbol"] = *symbol_inline;
    } else {
      j["symbol"] = symbol_path.filename().string();
    }
    if (polynomial) {
      j["test_function"] = {{"polynomial", *polynomial}};
    } else {
      j["test_function"] = test_function;
    }
    j["mc_samples"] = mc_samples;
    j["seed"] = seed;
    j["max_rank"] = max_rank;
    j["gap_tolerance"] = gap_tolerance;
    j["trend_tolerance"] = trend_tolerance;
    j["hermitian"] = hermitian == HermitianMode::AutoComplete ? "auto" : "enforce";
    return j;
  }

  /// FNV-1a 64 of the canonical JSON form (output directory excluded).
  std::string hash() const {
    const std::string text = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

/// Geometric-ish cutoff schedule; entries whose basis exceeds max_rank are dropped.
inline std::vector<std::uint64_t> default_cutoffs(std::size_t d, std::uint64_t max_rank, std::uint64_t degree = 0) {
  std::vector<std::uint64_t> base;
  if (d == 1) {
    base = {10, 20, 40, 60, 80, 100};
  } else {
    base = {2, 4, 8, 12, 16, 24, 32, 40};
  }
  std::vector<std::uint64_t> out;
  for (auto N : base) {
    if (rank_PN(d, N + degree) <= max_rank) out.push_back(N);
  }
  if (out.empty()) out.push_back(0);
  return out;
}

namespace detail {

inline void validate(const ExperimentConfig& c, const std::string& source) {
  if (c.dimension == 0) throw ParseError(source, 0, "'dimension' must be a positive integer");
  if (c.cutoffs.empty()) throw ParseError(source, 0, "'cutoffs' must be nonempty");
  for (std::size_t k = 1; k < c.cutoffs.size(); ++k) {
    if (c.cutoffs[k] <= c.cutoffs[k - 1]) throw ParseError(source, 0, "'cutoffs' must be strictly increasing");
  }
  if (c.space == ExperimentConfig::Space::Bergman && !c.bergman_a) {
    throw ParseError(source, 0, "bergman space needs 'bergman_a'");
  }
  if (c.bergman_a && !(*c.bergman_a > -1.0)) throw ParseError(source, 0, "'bergman_a' must be > -1");
  if (c.mc_samples == 0) throw ParseError(source, 0, "'mc_samples' must be positive");
  const bool polynomial_f = c.polynomial || c.test_function != "log";
  if (!polynomial_f && c.mc_samples < 1000) {
    throw ParseError(source, 0, "'mc_samples' must be >= 1000 for a non-polynomial test function");
  }
  try {
    (void)c.function();
  } catch (const PreconditionError& e) {
    throw ParseError(source, 0, e.what());
  }
}

}  // namespace detail

/// Reads an ExperimentConfig from JSON. Missing cutoffs get the default schedule.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                         const std::string& source) {
  if (!j.is_object()) throw ParseError(source, 0, "config must be a JSON object");
  ExperimentConfig c;
  try {
    const std::string space = j.value("space", std::string("drury-arveson"));
    if (space == "drury-arveson") {
      c.space = ExperimentConfig::Space::DruryArveson;
    } else if (space == "bergman") {
      c.space = ExperimentConfig::Space::Bergman;
    } else {
      throw ParseError(source, 0, "unknown space '" + space + "'");
    }
    if (j.contains("bergman_a")) c.bergman_a = j.at("bergman_a").get<double>();
    c.dimension = j.at("dimension").get<std::size_t>();
    const auto& sym = j.at("symbol");
    if (sym.is_string()) {
      c.symbol_path = base_dir / sym.get<std::string>();
    } else {
      c.symbol_inline = sym;
    }
    if (j.contains("test_function")) {
      const auto& f = j.at("test_function");
      if (f.is_string()) {
        c.test_function = f.get<std::string>();
      } else {
        c.polynomial = f.at("polynomial").get<std::vector<double>>();
      }
    }
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = base_dir / j.at("output_dir").get<std::string>();
    c.max_rank = j.value("max_rank", c.max_rank);
    c.gap_tolerance = j.value("gap_tolerance", c.gap_tolerance);
    c.trend_tolerance = j.value("trend_tolerance", c.trend_tolerance);
    const std::string herm = j.value("hermitian", std::string("auto"));
    if (herm == "auto") {
      c.hermitian = HermitianMode::AutoComplete;
    } else if (herm == "enforce") {
      c.hermitian = HermitianMode::Enforce;
    } else {
      throw ParseError(source, 0, "'hermitian' must be \"auto\" or \"enforce\"");
    }
    if (j.contains("cutoffs")) c.cutoffs = j.at("cutoffs").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  if (!j.contains("cutoffs") && c.dimension > 0) c.cutoffs = default_cutoffs(c.dimension, c.max_rank);
  detail::validate(c, source);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return config_from_json(detail::parse_json_text(text, path.string()), path.parent_path(), path.string());
}

/// Collects invariant outcomes for verdict.json.
class Verdict {
 public:
  Verdict(std::string experiment, const ExperimentConfig& config) : experiment_(std::move(experiment)) {
    doc_["experiment"] = experiment_;
    doc_["library_version"] = kVersion;
    doc_["config_hash"] = config.hash();
    doc_["config"] = config.to_json();
    doc_["invariants"] = nlohmann::json::array();
  }

  void check(const std::string& name, bool passed, nlohmann::json detail = {}) {
    add(name, passed ? "pass" : "fail", std::move(detail));
    all_pass_ = all_pass_ && passed;
  }

  /// Reported, never fails the run.
  void info(const std::string& name, nlohmann::json detail) { add(name, "info", std::move(detail)); }

  bool passed() const noexcept { return all_pass_; }

  nlohmann::json finish() {
    doc_["status"] = all_pass_ ? "pass" : "fail";
    doc_["exit_code"] = all_pass_ ? kExitPass : kExitInvariantFailed;
    return doc_;
  }

 private:
  void add(const std::string& name, const char* status, nlohmann::json detail) {
    nlohmann::json entry{{"name", name}, {"status", status}};
    if (!detail.is_null()) entry["detail"] = std::move(detail);
    doc_["invariants"].push_back(std::move(entry));
  }

  std::string experiment_;
  nlohmann::json doc_;
  bool all_pass_ = true;
};

struct RunResult {
  nlohmann::json verdict;
  int exit_code = kExitPass;
};

namespace detail {

inline std::vector<std::string> provenance_lines(const ExperimentConfig& config) {
  return {std::string("szego ") + kVersion, "config_hash=" + config.hash()};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_table(const ExperimentConfig& config, const ConvergenceTable& table, const std::string& name) {
  std::ostringstream os;
  table.write_csv(os, provenance_lines(config));
  write_text(config.output_dir / ("table_" + name + ".csv"), os.str());
}

inline void write_esd(const ExperimentConfig& config, const EmpiricalSpectralDistribution& esd,
                      const std::string& prefix) {
  std::ostringstream os;
  write_esd_csv(os, esd, provenance_lines(config));
  write_text(config.output_dir / (prefix + std::to_string(esd.provenance().cutoff) + ".csv"), os.str());
}

inline RunResult finish(const ExperimentConfig& config, Verdict& verdict) {
  RunResult result;
  result.verdict = verdict.finish();
  result.exit_code = verdict.passed() ? kExitPass : kExitInvariantFailed;
  write_text(config.output_dir / "verdict.json", result.verdict.dump(2) + "\n");
  return result;
}

inline nlohmann::json gaps_json(const ConvergenceTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows()) rows.push_back({{"N", r.N}, {"gap", r.gap()}});
  return rows;
}

}  // namespace detail

/// Both sides of the limit theorem over the cutoff schedule.
inline RunResult run_szego(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const auto file = config.load_symbol_file();
  const auto& symbol = file.symbol;
  const auto weights = config.weights();
  const auto f = config.function();
  const auto options = config.assembly();
  const IntegrationSpec spec{config.mc_samples, config.seed};

  // range of the symbol, for the log positivity check and containment report
  const auto range = symbol_range_bounds(symbol, std::min<std::uint64_t>(config.mc_samples, 200'000), config.seed);
  if (f.name == "log" && !(range.lower > 0.0)) {
    throw PositivityError("symbol takes the non-positive value " + format_double(range.lower) +
                              " on the sphere; log is undefined",
                          range.lower);
  }
  const ReferenceValue reference = pushforward_reference(symbol, f, spec);

  ConvergenceTable table("szego", {"rhs_std_error", "lambda_min", "lambda_max", "containment_violation"});
  const CompactPerturbation* K = file.perturbation ? &*file.perturbation : nullptr;
  for (auto N : config.cutoffs) {
    const auto op = assemble_truncation(symbol, weights, N, K, options);
    const auto esd = EmpiricalSpectralDistribution::of(op);
    if (f.name == "log" && !(esd.min() > kPositivityThreshold)) {
      throw PositivityError("truncation at N=" + std::to_string(N) + " has eigenvalue " + format_double(esd.min()),
                            esd.min());
    }
    detail::write_esd(config, esd, "esd_N");
    const auto gap = szego_gap(esd, reference, f);
    table.add_row({N, op.rank(), gap.lhs, gap.rhs, reference.exact ? 0.0 : 4.0 * reference.std_error,
                   {reference.std_error, esd.min(), esd.max(), containment_violation(esd, range.lower, range.upper)}});
  }
  detail::write_table(config, table, "szego");

  Verdict verdict("szego", config);
  verdict.check("gap_tail_non_increasing", table.tail_non_increasing(5, 1e-12), detail::gaps_json(table));
  const double allowed = config.gap_tolerance + (reference.exact ? 0.0 : 4.0 * reference.std_error);
  verdict.check("final_gap_below_tolerance", table.back().gap() < allowed,
                {{"gap", table.back().gap()}, {"tolerance", allowed}, {"rhs_exact", reference.exact}});
  double worst = 0.0;
  for (const auto& r : table.rows()) worst = std::max(worst, r.aux[3]);
  verdict.info("spectrum_containment",
               {{"sampled_range", {range.lower, range.upper}}, {"max_violation", worst}});
  return detail::finish(config, verdict);
}

/// Closed form of tau_N(S_i) for Drury-Arveson shifts.
inline double folner_closed_form(std::size_t d, std::size_t i, std::uint64_t N) {
  return std::sqrt(to_double(folner_ratio_sq_exact(d, i, N)));
}

/// Both Folner ratios for every generator S_i, S_i^* and for the configured operator.
inline RunResult run_folner(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const auto file = config.load_symbol_file();
  const auto weights = config.weights();
  const auto options = config.assembly();
  const std::size_t d = config.dimension;
  const CompactPerturbation* K = file.perturbation ? &*file.perturbation : nullptr;

  Verdict verdict("folner", config);
  const auto generator_table = [&](const ToeplitzPolynomial& op, const std::string& name) {
    ConvergenceTable table("folner_" + name, {"corner_ratio"});
    const std::size_t coordinate = static_cast<std::size_t>(std::stoul(name.substr(1)) - 1);
    for (auto N : config.cutoffs) {
      const auto d_N = to_u64_checked(rank_PN(d, N), "d_N");
      const double tau = folner_ratio_commutator(op, weights, N, nullptr, options);
      const double corner = folner_ratio_corner(op, weights, N, nullptr, options);
      const double rhs = weights.is_drury_arveson() ? folner_closed_form(d, coordinate, N) : 0.0;
      table.add_row({N, d_N, tau, rhs, std::sqrt(to_double(folner_bound_sq(d, N))), {corner}});
    }
    detail::write_table(config, table, "folner_" + name);
    if (weights.is_drury_arveson()) {
      double worst = 0.0;
      for (const auto& r : table.rows()) worst = std::max(worst, r.gap());
      verdict.check(name + "_closed_form", worst <= 1e-12, {{"max_abs_error", worst}});
    }
    bool bounded = true;
    for (const auto& r : table.rows()) bounded = bounded && r.lhs * r.lhs <= r.bound * r.bound * (1.0 + 1e-12);
    verdict.check(name + "_bound", bounded);
    std::vector<double> taus;
    for (const auto& r : table.rows()) taus.push_back(r.lhs);
    verdict.check(name + "_tail_non_increasing", ConvergenceTable::tail_non_increasing_values(taus, 5, 1e-12));
  };

  for (std::size_t i = 0; i < d; ++i) {
    generator_table(ToeplitzPolynomial::shift(d, i), "S" + std::to_string(i + 1));
    generator_table(ToeplitzPolynomial::shift_adjoint(d, i), "S" + std::to_string(i + 1) + "star");
  }

  ConvergenceTable table("folner", {"corner_ratio"});
  for (auto N : config.cutoffs) {
    const auto d_N = to_u64_checked(rank_PN(d, N), "d_N");
    const double tau = folner_ratio_commutator(file.symbol.polynomial(), weights, N, K, options);
    const double corner = folner_ratio_corner(file.symbol.polynomial(), weights, N, K, options);
    table.add_row({N, d_N, tau, 0.0, std::numeric_limits<double>::quiet_NaN(), {corner}});
  }
  detail::write_table(config, table, "folner");
  verdict.check("symbol_ratio_decreases", table.back().lhs <= table.rows().front().lhs + 1e-12,
                {{"first", table.rows().front().lhs}, {"last", table.back().lhs}});
  return detail::finish(config, verdict);
}

/// sqrt((N+1)/(d+N+a+2)): Bergman over Drury-Arveson shift weight at |m| = N.
inline double bergman_weight_ratio(std::size_t d, double a, std::uint64_t N) {
  const double n = static_cast<double>(N);
  return std::sqrt((n + 1.0) / (static_cast<double>(d) + n + a + 2.0));
}

/// Drury-Arveson vs Bergman(a) spectra of the same symbol.
inline RunResult run_bergman_comparison(const ExperimentConfig& config) {
  if (!config.bergman_a) throw PreconditionError("bergman comparison needs 'bergman_a' in the config");
  std::filesystem::create_directories(config.output_dir);
  const auto file = config.load_symbol_file();
  const auto options = config.assembly();
  const double a = *config.bergman_a;
  const std::size_t d = config.dimension;
  const auto da = WeightFamily::drury_arveson(d);
  const auto bergman = WeightFamily::bergman(d, a);
  const CompactPerturbation* K = file.perturbation ? &*file.perturbation : nullptr;

  ConvergenceTable table("bergman", {"weight_ratio_bergman_over_da", "weight_ratio_da_over_bergman", "chi_da",
                                     "chi_bergman"});
  for (auto N : config.cutoffs) {
    const auto op_da = assemble_truncation(file.symbol, da, N, K, options);
    const auto op_b = assemble_truncation(file.symbol, bergman, N, K, options);
    const auto esd_da = EmpiricalSpectralDistribution::of(op_da);
    const auto esd_b = EmpiricalSpectralDistribution::of(op_b);
    detail::write_esd(config, esd_da, "esd_N");
    detail::write_esd(config, esd_b, "esd_bergman_N");
    const double ratio = bergman_weight_ratio(d, a, N);
    table.add_row({N, op_da.rank(), kolmogorov_distance(esd_da, esd_b), 0.0, std::numeric_limits<double>::quiet_NaN(),
                   {ratio, 1.0 / ratio, chi_N(op_da), chi_N(op_b)}});
  }
  detail::write_table(config, table, "bergman");

  Verdict verdict("bergman", config);
  std::vector<double> ratio_gaps;
  for (const auto& r : table.rows()) ratio_gaps.push_back(std::abs(1.0 - r.aux[0]));
  verdict.check("weight_ratio_tends_to_one", ConvergenceTable::tail_non_increasing_values(ratio_gaps, ratio_gaps.size(), 0.0),
                {{"final_ratio", table.back().aux[0]}});
  verdict.check("kolmogorov_tail_non_increasing", table.tail_non_increasing(5, 1e-12), detail::gaps_json(table));
  return detail::finish(config, verdict);
}

/// Geometric mean of the spectrum against exp(int log phi dsigma).
inline RunResult run_determinant(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const auto file = config.load_symbol_file();
  const auto& symbol = file.symbol;
  const auto weights = config.weights();
  const auto options = config.assembly();
  const CompactPerturbation* K = file.perturbation ? &*file.perturbation : nullptr;

  const auto range = symbol_range_bounds(symbol, config.mc_samples, config.seed);
  if (!(range.lower > 0.0)) {
    throw PositivityError("symbol is not positive on the sphere (sampled minimum " + format_double(range.lower) + ")",
                          range.lower);
  }
  const auto log_integral = integrate_pushforward(symbol, TestFunction::log().f, config.mc_samples, config.seed);
  const double rhs = std::exp(log_integral.estimate);
  const double rhs_error = rhs * log_integral.std_error;

  ConvergenceTable table("det", {"rhs_std_error", "log_integral"});
  for (auto N : config.cutoffs) {
    const auto op = assemble_truncation(symbol, weights, N, K, options);
    const auto esd = EmpiricalSpectralDistribution::of(op);
    detail::write_esd(config, esd, "esd_N");
    table.add_row({N, op.rank(), geometric_mean(esd), rhs, 4.0 * rhs_error + config.trend_tolerance,
                   {rhs_error, log_integral.estimate}});
  }
  detail::write_table(config, table, "det");

  Verdict verdict("det", config);
  const double allowed = 4.0 * rhs_error + config.trend_tolerance;
  verdict.check("final_gap_within_tolerance", table.back().gap() <= allowed,
                {{"gap", table.back().gap()}, {"tolerance", allowed}});
  verdict.info("gap_tail_non_increasing", {{"holds", table.tail_non_increasing(5, 1e-12)}});
  verdict.info("sampled_range", {range.lower, range.upper});
  return detail::finish(config, verdict);
}

/// Runs `command` (run | folner | bergman | det) and maps failures to exit codes.
inline int dispatch(const std::string& command, const ExperimentConfig& config, std::ostream& log = std::cerr) {
  try {
    RunResult result;
    if (command == "run") {
      result = run_szego(config);
    } else if (command == "folner") {
      result = run_folner(config);
    } else if (command == "bergman") {
      result = run_bergman_comparison(config);
    } else if (command == "det") {
      result = run_determinant(config);
    } else {
      log << "unknown command '" << command << "'\n";
      return kExitUsage;
    }
    log << command << ": " << result.verdict["status"].get<std::string>() << " (" << config.output_dir.string()
        << "/verdict.json)\n";
    return result.exit_code;
  } catch (const ParseError& e) {
    log << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const PositivityError& e) {
    log << "positivity error: " << e.what() << '\n';
    return kExitPositivity;
  } catch (const CapExceeded& e) {
    log << "cap exceeded: " << e.what() << '\n';
    return kExitCapExceeded;
  } catch (const PreconditionError& e) {
    log << "invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace szego
