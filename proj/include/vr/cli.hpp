// Copyright 2026 The vr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VR_CLI_HPP_
#define VR_CLI_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vr/accountant.hpp"
#include "vr/bounds.hpp"
#include "vr/divergence.hpp"
#include "vr/errors.hpp"
#include "vr/params.hpp"

namespace vr::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Format { kText, kJson, kCsv };

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string fmt_full(double v) {
  nlohmann::json j = v;
  return j.dump();
}

// Options shared by every computing subcommand.
struct CommonOpts {
  std::string mechanism;
  std::string matrix_file;
  std::optional<double> opt_p, opt_beta, opt_q, opt_q0, opt_q1;
  std::optional<std::int64_t> n;
  std::optional<double> m;
  MechanismArgs args;
  Format format = Format::kText;
  EvalOptions eval;

  void add_to(CLI::App* cmd, bool mechanism_positional = false,
              bool rename_subset_k = false) {
    if (mechanism_positional) {
      cmd->add_option("mechanism", mechanism, "Catalog mechanism id");
    } else {
      cmd->add_option("--mechanism", mechanism, "Catalog mechanism id");
    }
    cmd->add_option("--matrix-file", matrix_file,
                    "JSON mechanism matrix {\"rows\": [[..]], ...}");
    cmd->add_option("--p", opt_p, "Ratio bound p (or wheel length with --mechanism)");
    cmd->add_option("--beta", opt_beta, "Total variation bound");
    cmd->add_option("--q", opt_q, "Blanket ratio bound");
    cmd->add_option("--q0", opt_q0, "Blanket ratio on the downward region");
    cmd->add_option("--q1", opt_q1, "Blanket ratio on the upward region");
    cmd->add_option("--n", n, "Number of users");
    cmd->add_option("--m", m, "Messages per user (multi-message) or mechanism arg m");
    for (const char* name : {"eps0", "f", "coin", "d01", "dmax", "B", "F",
                             "eps1", "eps2"}) {
      cmd->add_option_function<double>(
          std::string("--") + name,
          [this, name](double v) { args[name] = v; });
    }
    for (const char* name : {"d", "k", "l", "K", "s"}) {
      std::string flag = std::string("--") + name;
      // compose reserves --k for the round count.
      if (rename_subset_k && flag == "--k") flag = "--subset-k";
      cmd->add_option_function<std::int64_t>(
          flag, [this, name](std::int64_t v) {
            args[name] = static_cast<double>(v);
          });
    }
  }

  bool has_raw() const {
    return opt_beta.has_value() || opt_q.has_value() || opt_q0.has_value() ||
           opt_q1.has_value() || (opt_p.has_value() && mechanism.empty());
  }

  MechanismArgs full_args() const {
    MechanismArgs full = args;
    if (opt_p) full["p"] = *opt_p;
    if (n) full["n"] = static_cast<double>(*n);
    if (m) full["m"] = *m;
    return full;
  }

  MechanismSpec load_matrix() const {
    std::ifstream in(matrix_file);
    if (!in) throw std::ios_base::failure("cannot open " + matrix_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("matrix file: ") + e.what());
    }
    MechanismSpec spec;
    if (!j.contains("rows")) {
      throw ParameterError("matrix file: missing \"rows\"");
    }
    spec.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    if (j.contains("blanket_rows")) {
      spec.blanket_rows =
          j.at("blanket_rows").get<std::vector<std::vector<double>>>();
    }
    return spec;
  }

  VariationRatioParams symmetric() const {
    if (!mechanism.empty() && has_raw()) {
      throw ParameterError("give either raw --p/--beta/--q or --mechanism");
    }
    if (!matrix_file.empty()) {
      VariationRatioParams derived = derive_variation_ratio(load_matrix());
      return n ? derived.with_n_blanket(*n - 1) : derived;
    }
    if (!mechanism.empty()) return catalog(mechanism, full_args());
    if (!opt_p || !opt_beta || !opt_q) {
      throw ParameterError("raw parameters need --p, --beta and --q");
    }
    const std::int64_t nb = n ? *n - 1 : 0;
    return VariationRatioParams::create(*opt_p, *opt_beta, *opt_q, nb);
  }

  AsymmetricParams asymmetric() const {
    if (!mechanism.empty() || !matrix_file.empty()) {
      return AsymmetricParams::from_symmetric(symmetric());
    }
    if (!opt_p || !opt_beta) {
      throw ParameterError("raw parameters need --p and --beta");
    }
    double q0 = 0.0, q1 = 0.0;
    if (opt_q0 && opt_q1) {
      q0 = *opt_q0;
      q1 = *opt_q1;
    } else if (opt_q) {
      q0 = q1 = *opt_q;
    } else {
      throw ParameterError("raw parameters need --q or --q0/--q1");
    }
    const std::int64_t nb = n ? *n - 1 : 0;
    return AsymmetricParams::create(*opt_p, *opt_beta, q0, q1, nb);
  }
};

inline void add_format_option(CLI::App* cmd, Format* format) {
  cmd->add_option_function<std::string>(
         "--format",
         [format](const std::string& v) {
           if (v == "json") {
             *format = Format::kJson;
           } else if (v == "csv") {
             *format = Format::kCsv;
           } else if (v == "text") {
             *format = Format::kText;
           } else {
             throw CLI::ValidationError("--format must be json, csv or text");
           }
         },
         "Output format: text, json or csv")
      ->expected(1);
}

inline void print_kv(std::ostream& out, Format format,
                     const std::vector<std::pair<std::string, nlohmann::json>>&
                         fields) {
  if (format == Format::kJson) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    out << j.dump() << "\n";
    return;
  }
  for (const auto& [k, v] : fields) {
    out << k << " = ";
    if (v.is_number_float()) {
      out << fmt6(v.get<double>());
    } else {
      out << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    out << "\n";
  }
}

inline nlohmann::json bound_json(const BoundResult& res) {
  return nlohmann::json{
      {"eps", res.eps},
      {"kind", res.kind == BoundKind::kUpper ? "upper" : "lower"},
      {"resolution", res.resolution},
      {"evaluations", res.evaluations}};
}

inline void print_bound(std::ostream& out, Format format,
                        const BoundResult& res) {
  print_kv(out, format,
           {{"eps", res.eps},
            {"kind", res.kind == BoundKind::kUpper ? "upper" : "lower"},
            {"resolution", res.resolution},
            {"evaluations", res.evaluations}});
}

struct RangeSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t steps = 0;
};

inline RangeSpec parse_range(const std::string& text) {
  RangeSpec spec;
  char colon1 = 0, colon2 = 0;
  std::istringstream in(text);
  if (!(in >> spec.lo >> colon1 >> spec.hi >> colon2 >> spec.steps) ||
      colon1 != ':' || colon2 != ':' || spec.steps < 1 ||
      !(spec.lo <= spec.hi)) {
    throw ParameterError("range must be lo:hi:steps with lo <= hi, steps >= 1");
  }
  return spec;
}

}  // namespace detail

// Runs the command line given in args (without the program name). Output goes
// to out, diagnostics to err. Returns the process exit code: 0 ok, 2 usage,
// 3 unsupported regime or size, 4 I/O.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Privacy amplification accounting for the shuffle model"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read option defaults from an INI file");
  app.require_subcommand(1);

  Format format = Format::kText;
  EvalOptions eval;
  app.add_option("--threads", eval.threads, "Worker threads for slice loops");
  app.add_option("--trunc-delta", eval.trunc_delta,
                 "Binomial tail truncation added pessimistically");
  detail::add_format_option(&app, &format);

  int exit_code = 0;
  auto guarded = [&](auto&& body) {
    return [&, body]() {
      try {
        body();
      } catch (const UnsupportedRegimeError& e) {
        err << "vr: E_UNSUPPORTED: " << e.what() << "\n";
        exit_code = 3;
      } catch (const SizeError& e) {
        err << "vr: E_SIZE: " << e.what() << "\n";
        exit_code = 3;
      } catch (const std::ios_base::failure& e) {
        err << "vr: E_IO: " << e.what() << "\n";
        exit_code = 4;
      } catch (const std::exception& e) {
        err << "vr: E_USAGE: " << e.what() << "\n";
        exit_code = 2;
      }
    };
  };

  // -- params ---------------------------------------------------------------
  auto* cmd_params = app.add_subcommand(
      "params", "Variation-ratio parameters of a mechanism");
  cmd_params->fallthrough();
  auto params_opts = std::make_shared<detail::CommonOpts>();
  params_opts->add_to(cmd_params, /*mechanism_positional=*/true);
  cmd_params->callback(guarded([&, params_opts] {
    params_opts->eval = eval;
    const VariationRatioParams p = params_opts->symmetric();
    detail::print_kv(out, format,
                     {{"p", p.p},
                      {"beta", p.beta},
                      {"q", p.q},
                      {"alpha", p.alpha()},
                      {"r", p.r()},
                      {"n_blanket", p.n_blanket},
                      {"degenerate", p.degenerate}});
  }));

  // -- upper ------------------------------------------------------------------
  auto* cmd_upper =
      app.add_subcommand("upper", "Numerical amplification upper bound");
  cmd_upper->fallthrough();
  auto upper_opts = std::make_shared<detail::CommonOpts>();
  upper_opts->add_to(cmd_upper);
  auto upper_req = std::make_shared<BoundRequest>();
  cmd_upper->add_option("--delta", upper_req->delta, "Target delta");
  cmd_upper->add_option("--iters", upper_req->iters, "Binary search steps");
  cmd_upper->callback(guarded([&, upper_opts, upper_req] {
    upper_req->eval = eval;
    detail::print_bound(out, format,
                        upper_bound(upper_opts->symmetric(), *upper_req));
  }));

  // -- lower ------------------------------------------------------------------
  auto* cmd_lower =
      app.add_subcommand("lower", "Numerical amplification lower bound");
  cmd_lower->fallthrough();
  auto lower_opts = std::make_shared<detail::CommonOpts>();
  lower_opts->add_to(cmd_lower);
  auto lower_req = std::make_shared<BoundRequest>();
  auto tight_upper = std::make_shared<bool>(false);
  cmd_lower->add_option("--delta", lower_req->delta, "Target delta");
  cmd_lower->add_option("--iters", lower_req->iters, "Binary search steps");
  cmd_lower->add_flag("--tight-upper", *tight_upper,
                      "Return the conservative end of the bracket instead");
  cmd_lower->callback(guarded([&, lower_opts, lower_req, tight_upper] {
    lower_req->eval = eval;
    const auto mode = *tight_upper ? LowerBoundMode::kTightUpper
                                   : LowerBoundMode::kLower;
    detail::print_bound(
        out, format, lower_bound(lower_opts->asymmetric(), *lower_req, mode));
  }));

  // -- closed-form ---------------------------------------------------------------
  auto* cmd_closed =
      app.add_subcommand("closed-form", "Analytic or asymptotic bound");
  cmd_closed->fallthrough();
  auto closed_kind = std::make_shared<std::string>();
  cmd_closed->add_option("kind", *closed_kind, "analytic or asymptotic")
      ->required()
      ->check(CLI::IsMember({"analytic", "asymptotic"}));
  auto closed_opts = std::make_shared<detail::CommonOpts>();
  closed_opts->add_to(cmd_closed);
  auto closed_delta = std::make_shared<double>(1e-6);
  cmd_closed->add_option("--delta", *closed_delta, "Target delta");
  cmd_closed->callback(guarded([&, closed_kind, closed_opts, closed_delta] {
    const VariationRatioParams p = closed_opts->symmetric();
    const ClosedFormResult res = *closed_kind == "analytic"
                                     ? analytic_bound(p, *closed_delta)
                                     : asymptotic_bound(p, *closed_delta);
    if (res.ok()) {
      detail::print_kv(out, format, {{"eps", *res.eps}, {"kind", *closed_kind}});
    } else if (format == Format::kJson) {
      detail::print_kv(out, format,
                       {{"eps", nullptr},
                        {"kind", *closed_kind},
                        {"failed_precondition", res.failed_precondition}});
    } else {
      out << "precondition failed: " << res.failed_precondition << "\n";
    }
  }));

  // -- compose ---------------------------------------------------------------------
  auto* cmd_compose =
      app.add_subcommand("compose", "K-wise sequential composition curve");
  cmd_compose->fallthrough();
  auto compose_opts = std::make_shared<detail::CommonOpts>();
  compose_opts->add_to(cmd_compose, /*mechanism_positional=*/false,
                       /*rename_subset_k=*/true);
  auto plan = std::make_shared<CompositionPlan>();
  auto target_delta = std::make_shared<std::optional<double>>();
  auto plan_gamma = std::make_shared<std::optional<double>>();
  auto plan_mesh = std::make_shared<std::optional<double>>();
  auto plan_eps_upper = std::make_shared<std::optional<double>>();
  cmd_compose->add_option("--rounds,--k", plan->rounds, "Number of rounds K");
  cmd_compose->add_option("--eps-error", plan->eps_error, "Additive eps error");
  cmd_compose->add_option("--delta-error", plan->delta_error,
                          "Additive delta error");
  cmd_compose->add_option("--gamma", *plan_gamma, "Subsampling rate per round");
  cmd_compose->add_option("--mesh", *plan_mesh, "Grid spacing override");
  cmd_compose->add_option("--eps-upper", *plan_eps_upper,
                          "Single-round eps bound override");
  cmd_compose->add_option("--target-delta", *target_delta,
                          "Print the minimal eps at this delta");
  cmd_compose->callback(guarded([&, compose_opts, plan, target_delta,
                                 plan_gamma, plan_mesh, plan_eps_upper] {
    plan->eval = eval;
    plan->gamma = *plan_gamma;
    plan->mesh = *plan_mesh;
    plan->eps_upper = *plan_eps_upper;
    const VariationRatioParams p = compose_opts->symmetric();
    const PrivacyCurve curve =
        plan->gamma ? compose_subsampled(p, *plan->gamma, *plan)
                    : compose_params(p, *plan);
    if (*target_delta) {
      const auto eps = curve.eps_at_delta(**target_delta);
      if (!eps) {
        throw UnsupportedRegimeError(
            "compose: no grid eps reaches the target delta");
      }
      detail::print_kv(out, format,
                       {{"eps", *eps}, {"target_delta", **target_delta}});
      return;
    }
    if (format == Format::kJson) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        rows.push_back({{"eps", curve.grid[i]}, {"delta", curve.max_delta_at(i)}});
      }
      out << nlohmann::json{{"curve", rows}}.dump() << "\n";
    } else {
      out << "eps,delta\n";
      for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        out << detail::fmt_full(curve.grid[i]) << ","
            << detail::fmt_full(curve.max_delta_at(i)) << "\n";
      }
    }
  }));

  // -- sweep -----------------------------------------------------------------------
  auto* cmd_sweep =
      app.add_subcommand("sweep", "CSV sweep over a parameter grid");
  cmd_sweep->fallthrough();
  auto sweep_opts = std::make_shared<detail::CommonOpts>();
  sweep_opts->add_to(cmd_sweep);
  auto sweep_vary = std::make_shared<std::string>();
  auto sweep_range = std::make_shared<std::string>();
  auto sweep_out = std::make_shared<std::string>("-");
  auto sweep_req = std::make_shared<BoundRequest>();
  cmd_sweep->add_option("--vary", *sweep_vary, "eps0, n or beta")
      ->required()
      ->check(CLI::IsMember({"eps0", "n", "beta"}));
  cmd_sweep->add_option("--range", *sweep_range, "lo:hi:steps")->required();
  cmd_sweep->add_option("--out", *sweep_out, "Output CSV path, - for stdout");
  cmd_sweep->add_option("--delta", sweep_req->delta, "Target delta");
  cmd_sweep->add_option("--iters", sweep_req->iters, "Binary search steps");
  cmd_sweep->callback(guarded([&, sweep_opts, sweep_vary, sweep_range,
                               sweep_out, sweep_req] {
    sweep_req->eval = eval;
    const detail::RangeSpec range = detail::parse_range(*sweep_range);
    std::ofstream file;
    std::ostream* sink = &out;
    if (*sweep_out != "-") {
      file.open(*sweep_out);
      if (!file) throw std::ios_base::failure("cannot open " + *sweep_out);
      sink = &file;
    }
    *sink << "# vr " << kVersion << "\n";
    *sink << "param,eps_numeric,eps_analytic,eps_asymptotic,"
             "amplification_ratio,log2_ratio\n";
    for (std::int64_t i = 0; i < range.steps; ++i) {
      double value;
      if (range.steps == 1) {
        value = range.lo;
      } else if (*sweep_vary == "n") {
        // Decade-style sweeps call for geometric spacing.
        value = range.lo * std::pow(range.hi / range.lo,
                                    static_cast<double>(i) /
                                        static_cast<double>(range.steps - 1));
      } else {
        value = range.lo + (range.hi - range.lo) * static_cast<double>(i) /
                               static_cast<double>(range.steps - 1);
      }
      detail::CommonOpts point = *sweep_opts;
      if (*sweep_vary == "eps0") {
        if (point.mechanism.empty()) {
          throw ParameterError("sweep: --vary eps0 needs --mechanism");
        }
        point.args["eps0"] = value;
      } else if (*sweep_vary == "n") {
        point.n = static_cast<std::int64_t>(std::llround(value));
      } else {
        point.opt_beta = value;
      }
      const VariationRatioParams p = point.symmetric();
      const double eps0 = std::log(p.p);
      const BoundResult numeric = upper_bound(p, *sweep_req);
      const ClosedFormResult analytic = analytic_bound(p, sweep_req->delta);
      const ClosedFormResult asymptotic = asymptotic_bound(p, sweep_req->delta);
      const double ratio = eps0 / numeric.eps;
      *sink << detail::fmt_full(value) << "," << detail::fmt_full(numeric.eps)
            << "," << (analytic.ok() ? detail::fmt_full(*analytic.eps) : "")
            << "," << (asymptotic.ok() ? detail::fmt_full(*asymptotic.eps) : "")
            << "," << detail::fmt_full(ratio) << ","
            << detail::fmt_full(std::log2(ratio)) << "\n";
    }
  }));

  // -- oracle ----------------------------------------------------------------------
  auto* cmd_oracle = app.add_subcommand(
      "oracle", "Exact bound via the brute-force divergence");
  cmd_oracle->fallthrough();
  auto oracle_opts = std::make_shared<detail::CommonOpts>();
  oracle_opts->add_to(cmd_oracle);
  auto oracle_req = std::make_shared<BoundRequest>();
  auto max_n = std::make_shared<std::int64_t>(kBruteForceCap);
  cmd_oracle->add_option("--delta", oracle_req->delta, "Target delta");
  cmd_oracle->add_option("--iters", oracle_req->iters, "Binary search steps");
  cmd_oracle->add_option("--max-n", *max_n, "Guard on n_blanket");
  cmd_oracle->callback(guarded([&, oracle_opts, oracle_req, max_n] {
    const AsymmetricParams p = oracle_opts->asymmetric();
    if (p.n_blanket > *max_n) {
      throw SizeError("oracle: n_blanket exceeds --max-n");
    }
    oracle_req->validate();
    if (p.beta == 0.0) {
      detail::print_bound(out, format, BoundResult{0.0, BoundKind::kUpper, 0.0, 0});
      return;
    }
    auto max_delta = [&](double eps) {
      return std::max(brute_force_delta(eps, p, Direction::kForward),
                      brute_force_delta(eps, p, Direction::kBackward));
    };
    const bool finite = std::isfinite(p.p);
    const auto search = vr::detail::bisect_eps(
        max_delta, finite ? std::log(p.p) : 0.0, finite, oracle_req->delta,
        oracle_req->iters);
    detail::print_bound(out, format,
                        BoundResult{search.hi, BoundKind::kUpper,
                                    search.hi - search.lo, search.evaluations});
  }));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "vr: E_USAGE: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

}  // namespace vr::cli

#endif  // VR_CLI_HPP_
