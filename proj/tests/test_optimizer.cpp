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

#include "doctest.h"

#include <cmath>

#include "test_util.hpp"

#include "fas_keygen/optimizer.hpp"

using namespace faskeygen;

namespace {

double norm2(const cvec &v) {
    double s = 0.0;
    for (const auto &z : v)
        s += std::norm(z);
    return std::sqrt(s);
}

double weighted_l1(const cvec &v, const std::vector<double> &w) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += w[i] * std::abs(v[i]);
    return s;
}

cvec random_cvec(CounterRng &rng, int m, double scale) {
    cvec v(m);
    for (auto &z : v)
        z = scale * rng.next_cn();
    return v;
}

double minorant(const cvec &w_prev, const cvec &c, const SpatialCorrelation &corr,
                const cvec &at) {
    double lin = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i)
        lin += (std::conj(c[i]) * at[i]).real();
    return -quad_form(corr, w_prev) + 2.0 * lin;
}

// the eliminated-slack surrogate of the correlated-scenario subproblem
double p2_surrogate(const cvec &w, const cvec &w_prev, const SpatialCorrelation &corr,
                    double beta_ab, double beta_ae, double sigma2) {
    const double q_prev = quad_form(corr, w_prev);
    double a = 0.0;
    const int m = (int)w.size();
    for (int i = 0; i < m; ++i) {
        std::complex<double> jw{0.0, 0.0};
        for (int j = 0; j < m; ++j)
            jw += corr.matrix.at(i, j) * w_prev[j];
        a += (std::conj(jw) * w[i]).real();
    }
    a /= std::sqrt(q_prev);
    const double q = quad_form(corr, w);
    const double den = beta_ae * a + sigma2;
    if (den <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return beta_ab * a - beta_ab * beta_ae * q * q / den;
}

KgrModel toy_model(const SpatialCorrelation &corr, double beta_ab, double beta_ae, double p_b,
                   double sigma2) {
    KgrModel m;
    m.corr = &corr;
    m.beta_ab = beta_ab;
    m.beta_ae = beta_ae;
    m.P_B = p_b;
    m.sigma2 = sigma2;
    m.rho = 1.0;
    return m;
}

} // namespace

TEST_CASE("linearize_quadratic") {
    const SpatialCorrelation corr = build_correlation(6, 0.5);

    SUBCASE("acting on an eigenvector scales it by the eigenvalue") {
        auto [lam, u] = leading_eigpair(corr.matrix);
        cvec w(6);
        for (int i = 0; i < 6; ++i)
            w[i] = {u[i], 0.0};
        const cvec c = linearize_quadratic(w, corr, 2.0);
        for (int i = 0; i < 6; ++i)
            CHECK(std::abs(c[i] - 2.0 * lam * w[i]) <= 1e-12);
    }

    SUBCASE("tangency at the anchor") {
        CounterRng rng(5);
        const cvec w_prev = random_cvec(rng, 6, 0.7);
        const cvec c = linearize_quadratic(w_prev, corr, 1.0);
        const double q = quad_form(corr, w_prev);
        CHECK(std::fabs(minorant(w_prev, c, corr, w_prev) - q) <= 1e-10 * std::max(1.0, q));
    }

    SUBCASE("minorizes the quadratic everywhere") {
        CounterRng rng(6);
        const cvec w_prev = random_cvec(rng, 6, 0.7);
        const cvec c = linearize_quadratic(w_prev, corr, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            const cvec w = random_cvec(rng, 6, 1.5);
            CHECK(minorant(w_prev, c, corr, w) <= quad_form(corr, w) + 1e-10);
        }
    }

    SUBCASE("degenerate anchor rejected") {
        const cvec zero(6, {0.0, 0.0});
        CHECK_THROWS_AS(linearize_quadratic(zero, corr, 1.0), std::invalid_argument);
    }
}

TEST_CASE("project_ball_intersection") {
    CounterRng rng(7);
    const int m = 8;
    const double pa = 2.0;
    const double nb = 1.4;
    std::vector<double> vw(m);
    for (double &x : vw)
        x = 0.3 + rng.next_uniform();

    SUBCASE("feasible points are returned unchanged") {
        cvec v = random_cvec(rng, m, 0.05);
        const cvec p = project_ball_intersection(v, vw, pa, nb);
        for (int i = 0; i < m; ++i)
            CHECK(p[i] == v[i]);
    }

    SUBCASE("with a slack l1 budget the projection is ball scaling") {
        cvec v = random_cvec(rng, m, 3.0);
        const cvec p = project_ball_intersection(v, vw, pa, 1e18);
        const double s = std::min(1.0, std::sqrt(pa) / norm2(v));
        for (int i = 0; i < m; ++i)
            CHECK(std::abs(p[i] - s * v[i]) <= 1e-12);
    }

    SUBCASE("projection is idempotent and feasible") {
        for (int trial = 0; trial < 200; ++trial) {
            cvec v = random_cvec(rng, m, 4.0);
            const cvec p = project_ball_intersection(v, vw, pa, nb);
            CHECK(norm2(p) * norm2(p) <= pa + 1e-9);
            CHECK(weighted_l1(p, vw) <= nb + 1e-9);
            const cvec pp = project_ball_intersection(p, vw, pa, nb);
            for (int i = 0; i < m; ++i)
                CHECK(std::abs(pp[i] - p[i]) <= 1e-12);
        }
    }

    SUBCASE("variational characterization against random feasible points") {
        cvec v = random_cvec(rng, m, 4.0);
        const cvec p = project_ball_intersection(v, vw, pa, nb);
        double dp = 0.0;
        for (int i = 0; i < m; ++i)
            dp += std::norm(p[i] - v[i]);
        for (int trial = 0; trial < 1000; ++trial) {
            cvec u = random_cvec(rng, m, 2.0);
            // force feasibility by scaling into both constraints
            const double s = std::min({1.0, std::sqrt(pa) / norm2(u), nb / weighted_l1(u, vw)});
            for (auto &z : u)
                z *= s * rng.next_uniform();
            double du = 0.0;
            for (int i = 0; i < m; ++i)
                du += std::norm(u[i] - v[i]);
            CHECK(dp <= du + 1e-9);
        }
    }

    SUBCASE("phases survive the projection") {
        cvec v = random_cvec(rng, m, 4.0);
        const cvec p = project_ball_intersection(v, vw, pa, nb);
        for (int i = 0; i < m; ++i) {
            if (std::abs(p[i]) == 0.0)
                continue;
            const std::complex<double> r = p[i] * std::conj(v[i]);
            CHECK(r.real() >= 0.0);
            CHECK(std::fabs(r.imag()) <= 1e-12 * std::abs(p[i]) * std::abs(v[i]) + 1e-18);
        }
    }

    SUBCASE("contract guards") {
        cvec v = random_cvec(rng, m, 1.0);
        std::vector<double> bad = vw;
        bad[0] = 0.0;
        CHECK_THROWS_AS(project_ball_intersection(v, bad, pa, nb), std::invalid_argument);
        CHECK_THROWS_AS(project_ball_intersection(v, vw, 0.0, nb), std::invalid_argument);
    }
}

TEST_CASE("solve_p1_subproblem") {
    const SpatialCorrelation corr = build_correlation(2, 0.5);
    CounterRng rng(9);

    SubproblemSpec spec;
    spec.kind = ProblemKind::P1;
    spec.P_A = 1.0;
    spec.model = toy_model(corr, 1.0, 0.5, 1.0, 1.0);

    SUBCASE("no l1 pressure: full-power matched direction") {
        spec.w_prev = random_cvec(rng, 2, 0.6);
        spec.weights = {0.0, 0.0};
        spec.N_budget = 100.0;
        const Beamformer sol = solve_p1_subproblem(spec);
        const cvec c = linearize_quadratic(spec.w_prev, corr, 1.0);
        const double cn = norm2(c);
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(sol.w[i] - std::sqrt(spec.P_A) * c[i] / cn) <= 1e-10);
    }

    SUBCASE("active l1: matches a dense grid search over signed magnitudes") {
        spec.w_prev = {{0.9, 0.0}, {0.35, 0.0}};
        spec.weights = {1.0, 1.0};
        spec.N_budget = 1.1; // binds: the sphere alone would give ||w||_1 ~ 1.39
        const Beamformer sol = solve_p1_subproblem(spec);
        const cvec c = linearize_quadratic(spec.w_prev, corr, 1.0);

        double best = -1e300;
        const int grid = 2000;
        for (int i = 0; i <= grid; ++i) {
            const double x0 = (double)i / grid; // c has positive entries here
            for (int j = 0; j <= grid; ++j) {
                const double x1 = (double)j / grid;
                if (x0 * x0 + x1 * x1 > spec.P_A || x0 + x1 > spec.N_budget)
                    continue;
                best = std::max(best, std::abs(c[0]) * x0 + std::abs(c[1]) * x1);
            }
        }
        double got = 0.0;
        for (int i = 0; i < 2; ++i)
            got += (std::conj(c[i]) * sol.w[i]).real();
        CHECK(got >= best - 1e-4 * std::fabs(best));
        CHECK(norm2(sol.w) * norm2(sol.w) <= spec.P_A + 1e-9);
        CHECK(weighted_l1(sol.w, spec.weights) <= spec.N_budget + 1e-9);
    }

    SUBCASE("KKT certificate on random weighted instances") {
        const SpatialCorrelation corr8 = build_correlation(8, 0.7);
        SubproblemSpec s8;
        s8.kind = ProblemKind::P1;
        s8.P_A = 1.7;
        s8.model = toy_model(corr8, 1.0, 0.5, 1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            s8.w_prev = random_cvec(rng, 8, 0.4);
            s8.weights.assign(8, 0.0);
            for (double &x : s8.weights)
                x = 0.2 + rng.next_uniform();
            s8.N_budget = 0.5 + rng.next_uniform();
            const Beamformer sol = solve_p1_subproblem(s8);
            const cvec c = linearize_quadratic(s8.w_prev, corr8, 1.0);
            const double cmax = [&] {
                double v = 0.0;
                for (auto &z : c)
                    v = std::max(v, std::abs(z));
                return v;
            }();

            // recover (lambda, mu) from the active constraint set, then check
            // stationarity on the support and dual feasibility off it
            const double gap2 = s8.P_A - norm2(sol.w) * norm2(sol.w);
            const double gap1 = s8.N_budget - weighted_l1(sol.w, s8.weights);
            const double act_tol = 1e-7 * std::max(1.0, s8.P_A + s8.N_budget);
            const bool l2_active = gap2 <= act_tol;
            const bool l1_active = gap1 <= act_tol;

            double s_xx = 0, s_vv = 0, s_xv = 0, s_cx = 0, s_cv = 0;
            int support = 0;
            for (int i = 0; i < 8; ++i) {
                const double x = std::abs(sol.w[i]);
                if (x <= 1e-12)
                    continue;
                ++support;
                const double a = std::abs(c[i]);
                s_xx += 4.0 * x * x;
                s_vv += s8.weights[i] * s8.weights[i];
                s_xv += 2.0 * x * s8.weights[i];
                s_cx += 2.0 * x * a;
                s_cv += s8.weights[i] * a;
            }
            double lambda = 0.0, mu = 0.0;
            const double det = s_xx * s_vv - s_xv * s_xv;
            if (l2_active && l1_active && support >= 2 &&
                std::fabs(det) > 1e-10 * std::max(1.0, s_xx * s_vv)) {
                lambda = (s_cx * s_vv - s_cv * s_xv) / det;
                mu = (s_cv * s_xx - s_cx * s_xv) / det;
            } else if (l2_active && !l1_active) {
                lambda = s_xx > 0.0 ? s_cx / s_xx : 0.0;
            } else if (l1_active && !l2_active) {
                mu = s_vv > 0.0 ? s_cv / s_vv : 0.0;
            } else {
                // degenerate corner: both constraints pinned by one port
                for (int i = 0; i < 8; ++i)
                    if (std::abs(sol.w[i]) <= 1e-12)
                        mu = std::max(mu, std::abs(c[i]) / s8.weights[i]);
                if (support == 1 && s_xx > 0.0)
                    lambda = std::max(0.0, (s_cx - mu * s_xv) / s_xx);
            }
            if (mu < 0.0)
                mu = 0.0;
            if (lambda < 0.0)
                lambda = 0.0;
            for (int i = 0; i < 8; ++i) {
                const double x = std::abs(sol.w[i]);
                const double stat = std::abs(c[i]) - 2.0 * lambda * x - mu * s8.weights[i];
                if (x > 1e-12)
                    CHECK(std::fabs(stat) <= 1e-7 * std::max(1.0, cmax));
                else
                    CHECK(stat <= 1e-7 * std::max(1.0, cmax));
            }
            // complementary slackness
            CHECK(lambda * gap2 <= 1e-6 * std::max(1.0, cmax));
            CHECK(mu * gap1 <= 1e-6 * std::max(1.0, cmax));
        }
    }

    SUBCASE("solution does not fall below the anchor's minorant value") {
        spec.w_prev = random_cvec(rng, 2, 0.5);
        spec.weights = {1.0, 1.0};
        spec.N_budget = 1.0;
        // make the anchor feasible first
        spec.w_prev = project_ball_intersection(spec.w_prev, spec.weights, spec.P_A,
                                                spec.N_budget);
        const Beamformer sol = solve_p1_subproblem(spec);
        const cvec c = linearize_quadratic(spec.w_prev, corr, 1.0);
        CHECK(minorant(spec.w_prev, c, corr, sol.w) >=
              minorant(spec.w_prev, c, corr, spec.w_prev) - 1e-9);
    }
}

TEST_CASE("solve_p2_subproblem") {
    const SpatialCorrelation corr = build_correlation(2, 0.3);
    CounterRng rng(15);

    SubproblemSpec spec;
    spec.kind = ProblemKind::P2;
    spec.P_A = 1.0;
    spec.weights = {1.0, 1.0};
    spec.N_budget = 1.2;
    spec.model = toy_model(corr, 1.0, 0.8, 1.0, 0.5);

    SUBCASE("matches a signed 2-D grid oracle on the surrogate") {
        spec.w_prev = {{0.7, 0.0}, {0.3, 0.0}};
        const Beamformer sol = solve_p2_subproblem(spec);
        const double got = p2_surrogate(sol.w, spec.w_prev, corr, spec.model.beta_ab,
                                        spec.model.beta_ae, spec.model.sigma2);

        double best = -1e300;
        const int grid = 700;
        for (int i = -grid; i <= grid; ++i) {
            const double x0 = (double)i / grid;
            for (int j = -grid; j <= grid; ++j) {
                const double x1 = (double)j / grid;
                if (x0 * x0 + x1 * x1 > spec.P_A ||
                    std::fabs(x0) + std::fabs(x1) > spec.N_budget)
                    continue;
                const cvec w = {{x0, 0.0}, {x1, 0.0}};
                best = std::max(best, p2_surrogate(w, spec.w_prev, corr, spec.model.beta_ab,
                                                   spec.model.beta_ae, spec.model.sigma2));
            }
        }
        CHECK(got >= best - 1e-4 * std::max(1.0, std::fabs(best)));
    }

    SUBCASE("feasible ascent from the anchor") {
        for (int trial = 0; trial < 20; ++trial) {
            cvec w0 = random_cvec(rng, 2, 0.8);
            w0 = project_ball_intersection(w0, spec.weights, spec.P_A, spec.N_budget);
            if (quad_form(corr, w0) <= 1e-12)
                continue;
            spec.w_prev = w0;
            const Beamformer sol = solve_p2_subproblem(spec);
            const double at_sol = p2_surrogate(sol.w, w0, corr, spec.model.beta_ab,
                                               spec.model.beta_ae, spec.model.sigma2);
            const double at_anchor = p2_surrogate(w0, w0, corr, spec.model.beta_ab,
                                                  spec.model.beta_ae, spec.model.sigma2);
            CHECK(at_sol >= at_anchor - 1e-9);
            CHECK(norm2(sol.w) * norm2(sol.w) <= spec.P_A + 1e-9);
            CHECK(weighted_l1(sol.w, spec.weights) <= spec.N_budget + 1e-9);
        }
    }

    SUBCASE("slack variables are tight at the solution") {
        spec.w_prev = {{0.7, 0.0}, {0.3, 0.0}};
        const Beamformer sol = solve_p2_subproblem(spec);
        const double q_prev = quad_form(corr, spec.w_prev);
        double a = 0.0;
        for (int i = 0; i < 2; ++i) {
            std::complex<double> jw{0.0, 0.0};
            for (int j = 0; j < 2; ++j)
                jw += corr.matrix.at(i, j) * spec.w_prev[j];
            a += (std::conj(jw) * sol.w[i]).real();
        }
        a /= std::sqrt(q_prev);
        const double q = quad_form(corr, sol.w);
        const double y = spec.model.beta_ab * a;
        const double l = spec.model.beta_ae * a + spec.model.sigma2;
        const double ii = std::sqrt(spec.model.beta_ab * spec.model.beta_ae) * q;
        const double obj = y - ii * ii / l;
        const double direct = p2_surrogate(sol.w, spec.w_prev, corr, spec.model.beta_ab,
                                           spec.model.beta_ae, spec.model.sigma2);
        CHECK(std::fabs(obj - direct) <= 1e-7 * std::max(1.0, std::fabs(direct)));
    }

    SUBCASE("beta_ae = 0 reduces to the linear surrogate maximizer") {
        SubproblemSpec s = spec;
        s.model.beta_ae = 0.0;
        s.weights.clear();
        s.N_budget = std::numeric_limits<double>::infinity();
        s.w_prev = {{0.7, 0.0}, {0.3, 0.0}};
        const Beamformer p2 = solve_p2_subproblem(s);
        SubproblemSpec s1 = s;
        s1.kind = ProblemKind::P1;
        const Beamformer p1 = solve_p1_subproblem(s1);
        for (int i = 0; i < 2; ++i)
            CHECK(std::abs(p2.w[i] - p1.w[i]) <= 1e-4);
    }

    SUBCASE("degenerate anchor rejected") {
        spec.w_prev = {{0.0, 0.0}, {0.0, 0.0}};
        CHECK_THROWS_AS(solve_p2_subproblem(spec), std::invalid_argument);
    }
}

TEST_CASE("sca_solve on the full-support problem") {
    const SpatialCorrelation corr = build_correlation(32, 0.5);
    SystemConfig cfg;
    LinkBudget lb;
    lb.beta_ab = 2.0408163265306124e-7;
    lb.beta_ae = 2.1e-7;
    const KgrModel model = testutil::table1_model(corr, lb, cfg);
    const double pa = cfg.P_A;
    const double lam = corr.lambda_max();
    const Beamformer eig_init = testutil::full_power_eig_w(corr, pa);

    ScaOptions opt; // eps0 = 1e-4, cap 200

    SUBCASE("eigen-init converges immediately to the Rayleigh maximum") {
        for (ProblemKind kind : {ProblemKind::P1, ProblemKind::P2}) {
            const SolveTrace tr = sca_solve(kind, eig_init, {},
                                            std::numeric_limits<double>::infinity(), pa, model,
                                            opt);
            CHECK(tr.converged);
            CHECK(tr.iterations <= 2);
            CHECK(std::fabs(quad_form(corr, tr.final_w.w) - pa * lam) <= 1e-6);
        }
    }

    SUBCASE("random inits climb to >= 0.999 of the Rayleigh maximum (P1)") {
        CounterRng rng(23);
        for (int trial = 0; trial < 10; ++trial) {
            Beamformer init = testutil::random_feasible_w(rng, 32, pa);
            const SolveTrace tr = sca_solve(ProblemKind::P1, init, {},
                                            std::numeric_limits<double>::infinity(), pa, model,
                                            opt);
            CHECK(tr.converged);
            CHECK(tr.iterations <= 200);
            CHECK(quad_form(corr, tr.final_w.w) >= 0.999 * pa * lam);
        }
    }

    SUBCASE("objective traces never decrease") {
        CounterRng rng(29);
        for (ProblemKind kind : {ProblemKind::P1, ProblemKind::P2}) {
            for (int trial = 0; trial < 30; ++trial) {
                Beamformer init = testutil::random_feasible_w(rng, 32, pa);
                const SolveTrace tr = sca_solve(kind, init, {},
                                                std::numeric_limits<double>::infinity(), pa,
                                                model, opt);
                for (std::size_t i = 1; i < tr.objective.size(); ++i)
                    CHECK(tr.objective[i] >= tr.objective[i - 1] - 1e-8);
            }
        }
    }

    SUBCASE("infinite threshold stops after exactly one iteration") {
        ScaOptions inf_opt;
        inf_opt.eps0 = std::numeric_limits<double>::infinity();
        const SolveTrace tr = sca_solve(ProblemKind::P1, eig_init, {},
                                        std::numeric_limits<double>::infinity(), pa, model,
                                        inf_opt);
        CHECK(tr.iterations == 1);
        CHECK(tr.converged);
        CHECK(tr.objective.size() == 2);
    }

    SUBCASE("iteration cap yields a non-converged trace, not an error") {
        ScaOptions tight;
        tight.eps0 = 1e-300;
        tight.max_iterations = 3;
        CounterRng rng(31);
        Beamformer init = testutil::random_feasible_w(rng, 32, pa);
        const SolveTrace tr = sca_solve(ProblemKind::P1, init, {},
                                        std::numeric_limits<double>::infinity(), pa, model,
                                        tight);
        CHECK_FALSE(tr.converged);
        CHECK(tr.iterations == 3);
    }

    SUBCASE("identical inputs give bit-identical traces") {
        CounterRng rng(37);
        Beamformer init = testutil::random_feasible_w(rng, 32, pa);
        const SolveTrace a = sca_solve(ProblemKind::P2, init, {},
                                       std::numeric_limits<double>::infinity(), pa, model, opt);
        const SolveTrace b = sca_solve(ProblemKind::P2, init, {},
                                       std::numeric_limits<double>::infinity(), pa, model, opt);
        REQUIRE(a.objective.size() == b.objective.size());
        for (std::size_t i = 0; i < a.objective.size(); ++i)
            CHECK(a.objective[i] == b.objective[i]);
        for (int i = 0; i < 32; ++i)
            CHECK(a.final_w.w[i] == b.final_w.w[i]);
    }
}

TEST_CASE("Cauchy-Schwarz surrogate inequality on random pairs") {
    CounterRng rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        const cvec f = random_cvec(rng, 8, 1.0);
        const cvec f_prev = random_cvec(rng, 8, 1.0);
        std::complex<double> inner{0.0, 0.0};
        for (int i = 0; i < 8; ++i)
            inner += f[i] * std::conj(f_prev[i]);
        const double rhs = inner.real() / norm2(f_prev);
        CHECK(norm2(f) >= rhs - 1e-12);
    }
}
