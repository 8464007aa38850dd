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

#include "fas_keygen/ports.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace faskeygen {

namespace {

Scenario scenario_of(ProblemKind kind) {
    return kind == ProblemKind::P1 ? Scenario::iid : Scenario::correlated;
}

SpatialCorrelation make_correlation(const SymmetricMatrix &m) {
    SpatialCorrelation c;
    c.matrix = m;
    c.eig = sym_eig(m);
    c.sqrt_factor = psd_sqrt(m);
    return c;
}

cvec embed(const cvec &sub, const std::vector<int> &idx, int m) {
    cvec full(m, {0.0, 0.0});
    for (std::size_t i = 0; i < idx.size(); ++i)
        full[idx[i]] = sub[i];
    return full;
}

cvec restrict_to(const cvec &full, const std::vector<int> &idx) {
    cvec sub(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        sub[i] = full[idx[i]];
    return sub;
}

std::vector<int> to_one_based(std::vector<int> idx) {
    for (int &v : idx)
        ++v;
    return idx;
}

cvec real_to_cvec(const std::vector<double> &v) {
    cvec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = {v[i], 0.0};
    return out;
}

KgrResult final_kgr(const Beamformer &w, const KgrModel &model, Scenario scenario,
                    const std::string &label, int iterations,
                    std::vector<double> trace = {}) {
    KgrResult res;
    res.bits = evaluate_kgr_bits(w, model, scenario);
    res.scenario = scenario;
    res.method = label;
    res.iterations = iterations;
    res.objective_trace = std::move(trace);
    return res;
}

// SCA on a fixed support (no l1), then take whichever of the SCA iterate and
// the restricted Rayleigh maximizer evaluates better; the latter is the
// known optimum of the restricted problem at full power.
struct RestrictedSolve {
    Beamformer w_full;
    double t = 0.0;
    int iterations = 0;
    bool converged = true;
    std::vector<double> trace;
};

RestrictedSolve solve_on_support(ProblemKind kind, const MethodContext &ctx,
                                 const std::vector<int> &support, const cvec &init_full) {
    const int m = ctx.corr->order();
    const SymmetricMatrix sub_m = ctx.corr->matrix.submatrix(support);
    const SpatialCorrelation sub = make_correlation(sub_m);

    KgrModel sub_model = ctx.model();
    sub_model.corr = &sub;

    Beamformer init = Beamformer::from(restrict_to(init_full, support));
    ScaOptions opt;
    opt.eps0 = ctx.eps0;
    SolveTrace st = sca_solve(kind, init, {}, std::numeric_limits<double>::infinity(), ctx.P_A,
                              sub_model, opt);

    auto [lam, u] = leading_eigpair(sub_m);
    cvec eig_w = real_to_cvec(u);
    for (auto &z : eig_w)
        z *= std::sqrt(ctx.P_A);
    Beamformer eig_b = Beamformer::from(eig_w);

    const Scenario sc = scenario_of(kind);
    const double r_sca = evaluate_kgr_bits(st.final_w, sub_model, sc);
    const double r_eig = evaluate_kgr_bits(eig_b, sub_model, sc);

    RestrictedSolve out;
    const Beamformer &best = (r_eig >= r_sca) ? eig_b : st.final_w;
    out.w_full = Beamformer::from(embed(best.w, support, m));
    out.t = quad_form(sub, best.w);
    out.iterations = st.iterations;
    out.converged = st.converged;
    out.trace = st.objective;
    return out;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::reweighted:
        return "reweighted";
    case Method::sliding_window:
        return "sliding_window";
    case Method::sliding_window_no_opt:
        return "sliding_window_no_opt";
    case Method::traverse:
        return "traverse";
    case Method::fa_opt:
        return "fa_opt";
    case Method::fa_mrc:
        return "fa_mrc";
    }
    return "unknown";
}

Method method_from_name(const std::string &name) {
    if (name == "reweighted")
        return Method::reweighted;
    if (name == "sliding_window")
        return Method::sliding_window;
    if (name == "sliding_window_no_opt")
        return Method::sliding_window_no_opt;
    if (name == "traverse")
        return Method::traverse;
    if (name == "fa_opt")
        return Method::fa_opt;
    if (name == "fa_mrc")
        return Method::fa_mrc;
    throw std::invalid_argument("unknown method: " + name);
}

KgrModel MethodContext::model() const {
    KgrModel m;
    m.corr = corr;
    m.beta_ab = budget.beta_ab;
    m.beta_ae = budget.beta_ae;
    m.P_B = P_B;
    m.sigma2 = sigma2;
    m.rho = rho;
    return m;
}

MethodContext make_context(const SystemConfig &config, const SpatialCorrelation &corr,
                           const LinkBudget &budget) {
    MethodContext ctx;
    ctx.corr = &corr;
    ctx.budget = budget;
    ctx.P_A = config.P_A;
    ctx.P_B = config.P_B;
    ctx.sigma2 = config.sigma2;
    ctx.rho = config.rho;
    ctx.N = config.N;
    ctx.eps0 = config.eps0;
    ctx.gamma_reg = config.effective_gamma_reg();
    ctx.seed = config.seed;
    return ctx;
}

std::vector<double> reweight(const Beamformer &w_prev, double gamma_reg) {
    if (!(gamma_reg > 0.0))
        throw std::invalid_argument("reweight: gamma_reg must be > 0");
    std::vector<double> v(w_prev.w.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 1.0 / (std::abs(w_prev.w[i]) + gamma_reg);
    return v;
}

SelectionResult reweighted_solve(ProblemKind kind, const MethodContext &ctx) {
    const int m = ctx.corr->order();
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);

    // eigenvector init projected onto the initial (V = I) l1 ball
    auto [lam, u] = leading_eigpair(ctx.corr->matrix);
    cvec w0 = real_to_cvec(u);
    for (auto &z : w0)
        z *= std::sqrt(ctx.P_A);
    std::vector<double> v(m, 1.0);
    w0 = project_ball_intersection(w0, v, ctx.P_A, (double)ctx.N);

    Beamformer w = Beamformer::from(w0);
    double r_prev = evaluate_kgr_bits(w, model, sc);
    std::vector<double> outer_trace{r_prev};
    int total_iterations = 0;
    bool converged = false;

    ScaOptions opt;
    opt.eps0 = ctx.eps0;
    for (int r = 0; r < 50; ++r) {
        SolveTrace st = sca_solve(kind, w, v, (double)ctx.N, ctx.P_A, model, opt);
        w = st.final_w;
        total_iterations += st.iterations;
        const double r_now = evaluate_kgr_bits(w, model, sc);
        outer_trace.push_back(r_now);
        v = reweight(w, ctx.gamma_reg);
        if (std::fabs(r_now - r_prev) <= ctx.eps0) {
            converged = true;
            break;
        }
        r_prev = r_now;
    }

    // land on exactly N ports: keep the N largest magnitudes, then
    // re-optimize the beamformer on that fixed support
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(w.w[a]) > std::abs(w.w[b]);
    });
    std::vector<int> support(order.begin(), order.begin() + ctx.N);
    std::sort(support.begin(), support.end());

    // rescale the thresholded iterate to full power as the restricted init
    cvec masked(m, {0.0, 0.0});
    double mass = 0.0;
    for (int idx : support)
        mass += std::norm(w.w[idx]);
    const double s = mass > 0.0 ? std::sqrt(ctx.P_A / mass) : 0.0;
    for (int idx : support)
        masked[idx] = s * w.w[idx];
    if (!(mass > 0.0)) {
        // fall back to the restricted eigenvector when thresholding removed
        // all mass (can only happen from a degenerate run)
        auto [lam_s, u_s] = leading_eigpair(ctx.corr->matrix.submatrix(support));
        cvec sub = real_to_cvec(u_s);
        for (auto &z : sub)
            z *= std::sqrt(ctx.P_A);
        masked = embed(sub, support, m);
    }

    RestrictedSolve rs = solve_on_support(kind, ctx, support, masked);
    total_iterations += rs.iterations;

    SelectionResult res;
    res.method = Method::reweighted;
    res.indices = to_one_based(support);
    res.w = rs.w_full;
    res.objective_t = rs.t;
    res.kgr = final_kgr(res.w, model, sc, "reweighted", total_iterations, outer_trace);
    res.converged = converged;
    res.iterations = total_iterations;
    return res;
}

SlidingWindowInit sliding_window_init(const SpatialCorrelation &corr, int N, double P_A) {
    const int m = corr.order();
    if (N < 1 || N > m)
        throw std::invalid_argument("sliding_window_init: need 1 <= N <= M");

    auto [lam, u] = leading_eigpair(corr.matrix);

    int best_start = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int s = 0; s + N <= m; ++s) {
        // score of the masked (unnormalized) eigenvector on this window
        double score = 0.0;
        for (int i = s; i < s + N; ++i) {
            score += corr.matrix.at(i, i) * u[i] * u[i];
            for (int j = i + 1; j < s + N; ++j)
                score += 2.0 * corr.matrix.at(i, j) * u[i] * u[j];
        }
        if (score > best_score) {
            best_score = score;
            best_start = s;
        }
    }

    SlidingWindowInit init;
    init.raw_score = best_score;
    init.indices.resize(N);
    for (int i = 0; i < N; ++i)
        init.indices[i] = best_start + i;

    double mass = 0.0;
    for (int idx : init.indices)
        mass += u[idx] * u[idx];
    cvec w(m, {0.0, 0.0});
    const double s = mass > 0.0 ? std::sqrt(P_A / mass) : 0.0;
    for (int idx : init.indices)
        w[idx] = {s * u[idx], 0.0};
    init.w = Beamformer::from(w);
    return init;
}

SelectionResult sliding_window_solve(ProblemKind kind, const MethodContext &ctx) {
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);
    SlidingWindowInit init = sliding_window_init(*ctx.corr, ctx.N, ctx.P_A);
    RestrictedSolve rs = solve_on_support(kind, ctx, init.indices, init.w.w);

    SelectionResult res;
    res.method = Method::sliding_window;
    res.indices = to_one_based(init.indices);
    res.w = rs.w_full;
    res.objective_t = rs.t;
    res.kgr = final_kgr(res.w, model, sc, "sliding_window", rs.iterations, rs.trace);
    res.converged = rs.converged;
    res.iterations = rs.iterations;
    return res;
}

SelectionResult sliding_window_no_opt(ProblemKind kind, const MethodContext &ctx) {
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);
    SlidingWindowInit init = sliding_window_init(*ctx.corr, ctx.N, ctx.P_A);

    SelectionResult res;
    res.method = Method::sliding_window_no_opt;
    res.indices = to_one_based(init.indices);
    res.w = init.w;
    res.objective_t = quad_form(*ctx.corr, init.w.w);
    res.kgr = final_kgr(res.w, model, sc, "sliding_window_no_opt", 0);
    res.iterations = 0;
    return res;
}

double traverse_subset_count(int M, int N) {
    double c = 1.0;
    for (int i = 0; i < N; ++i)
        c = c * (double)(M - i) / (double)(i + 1);
    return c;
}

namespace {

long long binom_ll(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    long long c = 1;
    k = std::min(k, n - k);
    for (int i = 0; i < k; ++i)
        c = c * (n - i) / (i + 1);
    return c;
}

std::vector<int> unrank_combination(long long rank, int m, int n) {
    std::vector<int> comb(n);
    int x = 0;
    for (int i = 0; i < n; ++i) {
        while (true) {
            const long long cnt = binom_ll(m - x - 1, n - i - 1);
            if (rank < cnt) {
                comb[i] = x++;
                break;
            }
            rank -= cnt;
            ++x;
        }
    }
    return comb;
}

bool next_combination(std::vector<int> &comb, int m) {
    const int n = (int)comb.size();
    for (int i = n - 1; i >= 0; --i) {
        if (comb[i] < m - n + i) {
            ++comb[i];
            for (int j = i + 1; j < n; ++j)
                comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

struct SubsetBest {
    double kgr = -std::numeric_limits<double>::infinity();
    double t = 0.0;
    std::vector<int> subset;

    void consider(double k, double tv, const std::vector<int> &s) {
        if (k > kgr || (k == kgr && !subset.empty() && s < subset)) {
            kgr = k;
            t = tv;
            subset = s;
        }
    }
};

} // namespace

SelectionResult traverse(ProblemKind kind, const MethodContext &ctx) {
    const int m = ctx.corr->order();
    const int n = ctx.N;
    const double total_d = traverse_subset_count(m, n);
    if (total_d > 1e7)
        throw std::invalid_argument("traverse: " + std::to_string(total_d) +
                                    " subsets exceed the 10^7 guard");
    const long long total = (long long)(total_d + 0.5);
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);

    const int threads = std::max(1, ctx.threads);
    const long long chunk = (total + threads - 1) / threads;

    auto scan = [&](long long begin, long long end) {
        SubsetBest best;
        if (begin >= end)
            return best;
        std::vector<int> comb = unrank_combination(begin, m, n);
        for (long long r = begin; r < end; ++r) {
            const SymmetricMatrix sub = ctx.corr->matrix.submatrix(comb);
            const EigenDecomposition e = sym_eig(sub);
            const double t = ctx.P_A * e.values.front();
            const double k = kgr_bits_from_t(t, ctx.P_A, model, sc);
            best.consider(k, t, comb);
            if (r + 1 < end)
                next_combination(comb, m);
        }
        return best;
    };

    SubsetBest best;
    if (threads == 1) {
        best = scan(0, total);
    } else {
        std::vector<std::future<SubsetBest>> futs;
        for (int tix = 0; tix < threads; ++tix) {
            const long long b = tix * chunk;
            const long long e = std::min(total, b + chunk);
            futs.push_back(std::async(std::launch::async, scan, b, e));
        }
        for (auto &f : futs) {
            SubsetBest local = f.get();
            if (local.subset.empty())
                continue;
            if (best.subset.empty() || local.kgr > best.kgr ||
                (local.kgr == best.kgr && local.subset < best.subset))
                best = std::move(local);
        }
    }

    // rebuild the winner's beamformer
    auto [lam, u] = leading_eigpair(ctx.corr->matrix.submatrix(best.subset));
    cvec sub_w = real_to_cvec(u);
    for (auto &z : sub_w)
        z *= std::sqrt(ctx.P_A);

    SelectionResult res;
    res.method = Method::traverse;
    res.w = Beamformer::from(embed(sub_w, best.subset, m));
    res.indices = to_one_based(best.subset);
    res.objective_t = ctx.P_A * lam;
    res.kgr = final_kgr(res.w, model, sc, "traverse", 0);
    res.iterations = 0;
    return res;
}

std::vector<int> fa_uniform_ports(int M, int N) {
    std::vector<int> ports;
    if (N == 1) {
        ports.push_back(0);
        return ports;
    }
    // nearest integers of the uniform spacing over port numbers 1..M
    const double step = (double)(M - 1) / (double)(N - 1);
    std::vector<bool> taken(M, false);
    for (int i = 0; i < N; ++i) {
        int p = (int)std::rint(1.0 + (double)i * step) - 1;
        p = std::clamp(p, 0, M - 1);
        while (p < M && taken[p])
            ++p;
        while (p >= M || taken[p]) // ran past the end: search downward
            --p;
        taken[p] = true;
        ports.push_back(p);
    }
    std::sort(ports.begin(), ports.end());
    return ports;
}

SelectionResult fa_opt_baseline(ProblemKind kind, const MethodContext &ctx) {
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);
    const std::vector<int> support = fa_uniform_ports(ctx.corr->order(), ctx.N);

    auto [lam, u] = leading_eigpair(ctx.corr->matrix.submatrix(support));
    cvec sub = real_to_cvec(u);
    for (auto &z : sub)
        z *= std::sqrt(ctx.P_A);
    const cvec init = embed(sub, support, ctx.corr->order());

    RestrictedSolve rs = solve_on_support(kind, ctx, support, init);

    SelectionResult res;
    res.method = Method::fa_opt;
    res.indices = to_one_based(support);
    res.w = rs.w_full;
    res.objective_t = rs.t;
    res.kgr = final_kgr(res.w, model, sc, "fa_opt", rs.iterations, rs.trace);
    res.converged = rs.converged;
    res.iterations = rs.iterations;
    return res;
}

SelectionResult fa_mrc_baseline(ProblemKind kind, const MethodContext &ctx, int draws) {
    if (draws < 1000)
        throw std::invalid_argument("fa_mrc_baseline: needs at least 10^3 draws");
    const KgrModel model = ctx.model();
    const Scenario sc = scenario_of(kind);
    const int m = ctx.corr->order();
    const std::vector<int> support = fa_uniform_ports(m, ctx.N);
    const SymmetricMatrix sub_m = ctx.corr->matrix.submatrix(support);
    const SpatialCorrelation sub = make_correlation(sub_m);

    CounterRng rng(ctx.seed);
    ChannelDraw d;
    double kgr_sum = 0.0;
    double t_sum = 0.0;
    cvec first_w;
    for (int i = 0; i < draws; ++i) {
        sample_channel_into(*ctx.corr, ctx.budget, ctx.rho, rng, d);
        cvec h = restrict_to(d.h_ab, support);
        double hn = 0.0;
        for (const auto &z : h)
            hn += std::norm(z);
        cvec w_sub(h.size());
        const double s = hn > 0.0 ? std::sqrt(ctx.P_A / hn) : 0.0;
        for (std::size_t k = 0; k < h.size(); ++k)
            w_sub[k] = s * std::conj(h[k]);
        const double t = quad_form(sub, w_sub);
        kgr_sum += kgr_bits_from_t(t, ctx.P_A, model, sc);
        t_sum += t;
        if (i == 0)
            first_w = embed(w_sub, support, m);
    }

    SelectionResult res;
    res.method = Method::fa_mrc;
    res.indices = to_one_based(support);
    res.w = Beamformer::from(first_w);
    res.objective_t = t_sum / (double)draws;
    res.kgr.bits = kgr_sum / (double)draws;
    res.kgr.scenario = sc;
    res.kgr.method = "fa_mrc";
    res.kgr.iterations = 0;
    res.iterations = 0;
    return res;
}

SelectionResult run_method(Method method, ProblemKind kind, const MethodContext &ctx) {
    switch (method) {
    case Method::reweighted:
        return reweighted_solve(kind, ctx);
    case Method::sliding_window:
        return sliding_window_solve(kind, ctx);
    case Method::sliding_window_no_opt:
        return sliding_window_no_opt(kind, ctx);
    case Method::traverse:
        return traverse(kind, ctx);
    case Method::fa_opt:
        return fa_opt_baseline(kind, ctx);
    case Method::fa_mrc:
        return fa_mrc_baseline(kind, ctx);
    }
    throw std::invalid_argument("run_method: unknown method");
}

} // namespace faskeygen
