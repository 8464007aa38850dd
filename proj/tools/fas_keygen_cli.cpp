// fas-keygen: fluid-antenna-assisted physical-layer secret key generation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fas_keygen/harness.hpp"

namespace {

using namespace faskeygen;
using nlohmann::json;

SystemConfig config_from_option(const std::string &path) {
    return path.empty() ? SystemConfig{} : load_config(path);
}

Scenario scenario_from_string(const std::string &s) {
    if (s == "iid")
        return Scenario::iid;
    if (s == "correlated")
        return Scenario::correlated;
    throw std::invalid_argument("scenario must be \"iid\" or \"correlated\"");
}

Beamformer beamformer_from_option(const std::string &opt, const SpatialCorrelation &corr,
                                  double P_A) {
    const int m = corr.order();
    cvec w(m, {0.0, 0.0});
    if (opt == "leading-eigvec") {
        auto [lam, u] = leading_eigpair(corr.matrix);
        for (int i = 0; i < m; ++i)
            w[i] = {std::sqrt(P_A) * u[i], 0.0};
    } else if (opt == "uniform") {
        const double a = std::sqrt(P_A / (double)m);
        for (int i = 0; i < m; ++i)
            w[i] = {a, 0.0};
    } else {
        // JSON file: array of [re, im] pairs
        std::ifstream in(opt);
        if (!in)
            throw std::invalid_argument("cannot open beamformer file " + opt);
        json j;
        in >> j;
        if (!j.is_array() || (int)j.size() != m)
            throw std::invalid_argument("beamformer file must hold M [re, im] pairs");
        for (int i = 0; i < m; ++i)
            w[i] = {j[i][0].get<double>(), j[i][1].get<double>()};
    }
    return Beamformer::from(w);
}

json selection_to_json(const SelectionResult &res) {
    json o;
    o["method"] = method_name(res.method);
    o["indices"] = res.indices; // 1-based port numbers
    o["kgr_bits"] = res.kgr.bits;
    o["objective_t"] = res.objective_t;
    o["iterations"] = res.iterations;
    o["converged"] = res.converged;
    json wj = json::array();
    for (const auto &z : res.w.w)
        wj.push_back({z.real(), z.imag()});
    o["w"] = wj;
    return o;
}

int cmd_eval(const std::string &config_path, const std::string &scenario_str,
             const std::string &w_opt) {
    const SystemConfig config = config_from_option(config_path);
    const Scenario scenario = scenario_from_string(scenario_str);
    const SpatialCorrelation corr = build_correlation(config.M, config.W);
    CounterRng rng(config.seed);
    SystemConfig cfg = config;
    cfg.eve_mode = scenario == Scenario::iid ? EveMode::iid : EveMode::correlated;
    const LinkBudget budget = place_eve(cfg, rng);
    const Beamformer w = beamformer_from_option(w_opt, corr, config.P_A);
    const MethodContext ctx = make_context(cfg, corr, budget);
    const double bits = evaluate_kgr_bits(w, ctx.model(), scenario);

    json o;
    o["scenario"] = scenario_str;
    o["kgr_bits"] = bits;
    o["objective_t"] = quad_form(corr, w.w);
    o["beta_ab"] = budget.beta_ab;
    o["beta_ae"] = budget.beta_ae;
    std::cout << o.dump(2) << "\n";
    return 0;
}

int cmd_optimize(const std::string &config_path, const std::string &method_str,
                 const std::string &scenario_str) {
    const SystemConfig config = config_from_option(config_path);
    const Scenario scenario = scenario_from_string(scenario_str);
    const Method method = method_from_name(method_str);
    const ProblemKind kind = scenario == Scenario::iid ? ProblemKind::P1 : ProblemKind::P2;

    const SpatialCorrelation corr = build_correlation(config.M, config.W);
    CounterRng rng(config.seed);
    SystemConfig cfg = config;
    cfg.eve_mode = scenario == Scenario::iid ? EveMode::iid : EveMode::correlated;
    const LinkBudget budget = place_eve(cfg, rng);
    MethodContext ctx = make_context(cfg, corr, budget);
    ctx.threads = thread_count_from_env();

    const SelectionResult res = run_method(method, kind, ctx);
    std::cout << selection_to_json(res).dump(2) << "\n";
    return 0;
}

int cmd_sweep(const std::string &spec_path, const std::string &out_path,
              const std::string &format_str) {
    const SweepSpec spec = load_sweep_spec(spec_path);
    const auto rows = run_sweep(spec);
    const EmitFormat format = format_str == "json" ? EmitFormat::json : EmitFormat::csv;
    emit(rows, format, out_path);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    return 0;
}

int cmd_traverse(const std::string &config_path, const std::string &scenario_str) {
    const SystemConfig config = config_from_option(config_path);
    const Scenario scenario = scenario_from_string(scenario_str);
    const ProblemKind kind = scenario == Scenario::iid ? ProblemKind::P1 : ProblemKind::P2;

    const SpatialCorrelation corr = build_correlation(config.M, config.W);
    CounterRng rng(config.seed);
    SystemConfig cfg = config;
    cfg.eve_mode = scenario == Scenario::iid ? EveMode::iid : EveMode::correlated;
    const LinkBudget budget = place_eve(cfg, rng);
    MethodContext ctx = make_context(cfg, corr, budget);
    ctx.threads = thread_count_from_env();

    const SelectionResult res = traverse(kind, ctx);
    std::cout << selection_to_json(res).dump(2) << "\n";
    return 0;
}

int cmd_validate(const std::string &config_path) {
    const SystemConfig config = config_from_option(config_path);
    const auto checks = run_validation(config);
    bool all = true;
    for (const auto &c : checks) {
        std::printf("[%s] %-62s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        all = all && c.passed;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"fluid-antenna port selection and key-generation-rate evaluation"};
    app.require_subcommand(1);

    std::string config_path, scenario = "iid", w_opt = "leading-eigvec";
    std::string method = "sliding_window", spec_path, out_path, format = "csv";

    auto *eval = app.add_subcommand("eval", "evaluate the KGR of one beamformer");
    eval->add_option("--config", config_path, "config JSON path");
    eval->add_option("--scenario", scenario, "iid or correlated");
    eval->add_option("--w", w_opt, "leading-eigvec, uniform, or a JSON file of [re,im] pairs");

    auto *opt = app.add_subcommand("optimize", "run one port-selection method");
    opt->add_option("--config", config_path, "config JSON path");
    opt->add_option("--method", method,
                    "reweighted | sliding_window | sliding_window_no_opt | traverse | fa_opt | "
                    "fa_mrc");
    opt->add_option("--scenario", scenario, "iid or correlated");

    auto *sweep = app.add_subcommand("sweep", "run a sweep spec and write rows");
    sweep->add_option("--spec", spec_path, "sweep spec JSON path")->required();
    sweep->add_option("--out", out_path, "output path")->required();
    sweep->add_option("--format", format, "csv or json");

    auto *trav = app.add_subcommand("traverse", "exhaustive port-subset oracle");
    trav->add_option("--config", config_path, "config JSON path");
    trav->add_option("--scenario", scenario, "iid or correlated");

    auto *val = app.add_subcommand("validate", "oracle-equivalence and Monte-Carlo checks");
    val->add_option("--config", config_path, "config JSON path");

    try {
        app.parse(argc, argv);
        if (eval->parsed())
            return cmd_eval(config_path, scenario, w_opt);
        if (opt->parsed())
            return cmd_optimize(config_path, method, scenario);
        if (sweep->parsed())
            return cmd_sweep(spec_path, out_path, format);
        if (trav->parsed())
            return cmd_traverse(config_path, scenario);
        if (val->parsed())
            return cmd_validate(config_path);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 1;
    } catch (const faskeygen::numeric_error &e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
