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

#include "fas_keygen/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace faskeygen {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

cvec mat_vec(const SpatialCorrelation &corr, const cvec &w) {
    const int m = corr.order();
    cvec out(m, {0.0, 0.0});
    for (int i = 0; i < m; ++i) {
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < m; ++j)
            acc += corr.matrix.at(i, j) * w[j];
        out[i] = acc;
    }
    return out;
}

double norm2(const cvec &v) {
    double s = 0.0;
    for (const auto &z : v)
        s += std::norm(z);
    return std::sqrt(s);
}

double weighted_l1(const cvec &v, const std::vector<double> &weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += weights[i] * std::abs(v[i]);
    return s;
}

cvec scaled(const cvec &v, double s) {
    cvec out(v);
    for (auto &z : out)
        z *= s;
    return out;
}

// magnitudes with phases attached back from the reference vector
cvec recompose(const std::vector<double> &mags, const cvec &ref) {
    cvec out(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double r = std::abs(ref[i]);
        out[i] = (r > 0.0) ? ref[i] * (mags[i] / r) : std::complex<double>(mags[i], 0.0);
    }
    return out;
}

bool all_zero_weights(const std::vector<double> &weights) {
    for (double w : weights)
        if (w > 0.0)
            return false;
    return true;
}

} // namespace

cvec linearize_quadratic(const cvec &w_prev, const SpatialCorrelation &corr, double scale) {
    const double q = quad_form(corr, w_prev);
    if (!(q > 0.0))
        throw std::invalid_argument("linearize_quadratic: degenerate anchor (w^H J w == 0), "
                                    "re-initialize the iteration");
    cvec c = mat_vec(corr, w_prev);
    for (auto &z : c)
        z *= scale;
    return c;
}

cvec project_ball(const cvec &v, double P_A) {
    const double n = norm2(v);
    const double r = std::sqrt(P_A);
    if (n <= r)
        return v;
    return scaled(v, r / n);
}

cvec project_ball_intersection(const cvec &v, const std::vector<double> &weights, double P_A,
                               double n_budget) {
    if (!(P_A > 0.0) || !(n_budget > 0.0))
        throw std::invalid_argument("project_ball_intersection: budgets must be > 0");
    if (weights.size() != v.size())
        throw std::invalid_argument("project_ball_intersection: weight size mismatch");
    for (double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("project_ball_intersection: weights must be > 0");

    const int m = (int)v.size();
    std::vector<double> a(m);
    for (int i = 0; i < m; ++i)
        a[i] = std::abs(v[i]);

    const double r = std::sqrt(P_A);
    const double norm_a = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
    double l1_a = 0.0;
    for (int i = 0; i < m; ++i)
        l1_a += weights[i] * a[i];

    // case 1: already feasible
    if (norm_a <= r && l1_a <= n_budget)
        return v;

    // clip the candidate onto the feasible set exactly (removes bisection
    // residue of relative size ~1e-12)
    auto sanitize = [&](std::vector<double> x) {
        double nn = 0.0, l1 = 0.0;
        for (int i = 0; i < m; ++i) {
            nn += x[i] * x[i];
            l1 += weights[i] * x[i];
        }
        if (nn > P_A) {
            const double s = std::sqrt(P_A / nn);
            for (double &t : x)
                t *= s;
            l1 *= s;
        }
        if (l1 > n_budget) {
            const double s = n_budget / l1;
            for (double &t : x)
                t *= s;
        }
        return recompose(x, v);
    };

    const double tol = 1e-10 * std::max(1.0, n_budget);

    // case 2: sphere active, l1 slack
    if (norm_a > r) {
        std::vector<double> x(m);
        const double s = r / norm_a;
        double l1 = 0.0;
        for (int i = 0; i < m; ++i) {
            x[i] = s * a[i];
            l1 += weights[i] * x[i];
        }
        if (l1 <= n_budget + tol)
            return sanitize(x);
    }

    auto thresholded = [&](double mu, std::vector<double> &d) {
        for (int i = 0; i < m; ++i)
            d[i] = std::max(0.0, a[i] - mu * weights[i]);
    };
    double mu_hi = 0.0;
    for (int i = 0; i < m; ++i)
        mu_hi = std::max(mu_hi, a[i] / weights[i]);
    mu_hi += 1.0;

    // case 3: l1 active, sphere slack; V^T max(0, a - mu V) is continuous and
    // strictly decreasing to zero, so plain bisection applies.
    {
        std::vector<double> d(m);
        double lo = 0.0, hi = mu_hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            thresholded(mid, d);
            double l1 = 0.0;
            for (int i = 0; i < m; ++i)
                l1 += weights[i] * d[i];
            (l1 > n_budget ? lo : hi) = mid;
        }
        thresholded(hi, d);
        double nn = 0.0;
        for (double t : d)
            nn += t * t;
        if (nn <= P_A * (1.0 + 1e-9))
            return sanitize(d);
    }

    // case 4: both active; g(mu) = r * V^T d / ||d|| is non-increasing
    // (Cauchy-Schwarz), bisect it to n_budget and recover lambda from the
    // sphere equation (valid while ||d|| >= r).
    {
        std::vector<double> d(m);
        auto g_of = [&](double mu) {
            thresholded(mu, d);
            double l1 = 0.0, nn = 0.0;
            for (int i = 0; i < m; ++i) {
                l1 += weights[i] * d[i];
                nn += d[i] * d[i];
            }
            if (nn <= 0.0)
                return 0.0;
            return r * l1 / std::sqrt(nn);
        };
        double lo = 0.0, hi = mu_hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g_of(mid) > n_budget ? lo : hi) = mid;
        }
        const double mu = hi;
        thresholded(mu, d);
        double nn = 0.0;
        for (double t : d)
            nn += t * t;
        const double dn = std::sqrt(nn);
        if (dn >= r * (1.0 - 1e-9) && dn > 0.0) {
            std::vector<double> x(m);
            const double s = r / dn;
            for (int i = 0; i < m; ++i)
                x[i] = s * d[i];
            return sanitize(x);
        }
    }

    // numerical corner: fall back to Dykstra's alternating projections
    cvec x = v;
    cvec p(m, {0.0, 0.0}), q(m, {0.0, 0.0});
    for (int it = 0; it < 2000; ++it) {
        cvec y(m);
        for (int i = 0; i < m; ++i)
            y[i] = x[i] + p[i];
        cvec yb = project_ball(y, P_A);
        for (int i = 0; i < m; ++i)
            p[i] = y[i] - yb[i];
        cvec z(m);
        for (int i = 0; i < m; ++i)
            z[i] = yb[i] + q[i];
        // weighted soft-threshold projection onto the l1 ball
        std::vector<double> az(m);
        for (int i = 0; i < m; ++i)
            az[i] = std::abs(z[i]);
        double l1 = 0.0;
        for (int i = 0; i < m; ++i)
            l1 += weights[i] * az[i];
        cvec zl;
        if (l1 <= n_budget) {
            zl = z;
        } else {
            double lo = 0.0, hi = mu_hi;
            std::vector<double> d(m);
            for (int bit = 0; bit < 200; ++bit) {
                const double mid = 0.5 * (lo + hi);
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += weights[i] * std::max(0.0, az[i] - mid * weights[i]);
                (s > n_budget ? lo : hi) = mid;
            }
            for (int i = 0; i < m; ++i)
                d[i] = std::max(0.0, az[i] - hi * weights[i]);
            zl = recompose(d, z);
        }
        for (int i = 0; i < m; ++i)
            q[i] = z[i] - zl[i];
        x = zl;
    }
    std::vector<double> ax(m);
    for (int i = 0; i < m; ++i)
        ax[i] = std::abs(x[i]);
    return sanitize(ax);
}

// ---------- P1: linear objective over the intersection ----------

Beamformer solve_p1_subproblem(const SubproblemSpec &spec) {
    if (spec.kind != ProblemKind::P1)
        throw std::invalid_argument("solve_p1_subproblem: spec.kind must be P1");
    const SpatialCorrelation &corr = *spec.model.corr;
    const cvec c = linearize_quadratic(spec.w_prev, corr, 1.0);
    const int m = (int)c.size();
    const double r = std::sqrt(spec.P_A);

    const double cn = norm2(c);
    if (!(cn > 0.0))
        throw std::invalid_argument("solve_p1_subproblem: degenerate anchor");

    const bool no_l1 = spec.weights.empty() || all_zero_weights(spec.weights) ||
                       !std::isfinite(spec.N_budget);
    if (no_l1)
        return Beamformer::from(scaled(c, r / cn));

    const std::vector<double> &vw = spec.weights;
    std::vector<double> a(m);
    for (int i = 0; i < m; ++i)
        a[i] = std::abs(c[i]);

    // sphere-only candidate
    {
        double l1 = 0.0;
        for (int i = 0; i < m; ++i)
            l1 += vw[i] * (r * a[i] / cn);
        if (l1 <= spec.N_budget * (1.0 + 1e-12))
            return Beamformer::from(scaled(c, r / cn));
    }

    // index with the best objective-per-weight ratio decides the
    // concentration fallback (l2 slack)
    int best_k = -1;
    double best_ratio = -1.0;
    bool has_free = false; // any unweighted entry with gain
    for (int i = 0; i < m; ++i) {
        if (vw[i] <= 0.0) {
            if (a[i] > 0.0)
                has_free = true;
            continue;
        }
        const double ratio = a[i] / vw[i];
        if (ratio > best_ratio + 1e-18) {
            best_ratio = ratio;
            best_k = i;
        }
    }

    if (!has_free && best_k >= 0 && spec.N_budget < r * vw[best_k]) {
        // even full concentration on the best port cannot reach the sphere:
        // the power constraint is slack
        std::vector<double> x(m, 0.0);
        x[best_k] = spec.N_budget / vw[best_k];
        return Beamformer::from(recompose(x, c));
    }

    // both constraints: bisect the threshold so the sphere-scaled soft
    // thresholding meets the l1 budget
    std::vector<double> d(m);
    auto h_of = [&](double mu) {
        double nn = 0.0, l1 = 0.0;
        for (int i = 0; i < m; ++i) {
            d[i] = std::max(0.0, a[i] - mu * vw[i]);
            nn += d[i] * d[i];
        }
        if (nn <= 0.0)
            return 0.0;
        const double s = r / std::sqrt(nn);
        for (int i = 0; i < m; ++i)
            l1 += vw[i] * s * d[i];
        return l1;
    };
    double lo = 0.0;
    double hi = best_ratio >= 0.0 ? best_ratio : 1.0;
    if (has_free)
        hi += 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h_of(mid) > spec.N_budget ? lo : hi) = mid;
    }
    h_of(hi);
    double nn = 0.0;
    for (double t : d)
        nn += t * t;
    if (!(nn > 0.0)) {
        // threshold killed everything; concentrate on the best ratio index
        std::vector<double> x(m, 0.0);
        x[best_k] = std::min(r, spec.N_budget / vw[best_k]);
        return Beamformer::from(recompose(x, c));
    }
    std::vector<double> x(m);
    double s = r / std::sqrt(nn);
    for (int i = 0; i < m; ++i)
        x[i] = s * d[i];
    double l1 = 0.0;
    for (int i = 0; i < m; ++i)
        l1 += vw[i] * x[i];
    if (l1 > spec.N_budget) {
        const double shrink = spec.N_budget / l1;
        for (double &t : x)
            t *= shrink;
    }
    return Beamformer::from(recompose(x, c));
}

// ---------- P2: concave surrogate via projected gradient ascent ----------

namespace {

struct P2Objective {
    const SpatialCorrelation *corr;
    cvec grad_a; // J w_prev / sqrt(q_prev), gradient of the affine surrogate
    double beta_ae;
    double sigma2;

    double a_of(const cvec &w) const {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            s += grad_a[i].real() * w[i].real() + grad_a[i].imag() * w[i].imag();
        return s;
    }

    // objective normalized by beta_ab: a - beta_ae q^2 / (beta_ae a + sigma2)
    double value(const cvec &w) const {
        const double a = a_of(w);
        const double den = beta_ae * a + sigma2;
        if (den <= 0.0)
            return -k_inf;
        const double q = quad_form(*corr, w);
        return a - beta_ae * q * q / den;
    }

    cvec gradient(const cvec &w) const {
        const double a = a_of(w);
        const double den = beta_ae * a + sigma2;
        const double q = quad_form(*corr, w);
        const cvec jw = mat_vec(*corr, w);
        // d/dw [ a - beta_ae q^2/den ] with grad q = 2 J w, grad a constant
        const double c_q = -beta_ae * 2.0 * q / den;
        const double c_a = 1.0 + beta_ae * beta_ae * q * q / (den * den);
        cvec g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            g[i] = c_a * grad_a[i] + c_q * 2.0 * jw[i];
        return g;
    }
};

} // namespace

Beamformer solve_p2_subproblem(const SubproblemSpec &spec) {
    if (spec.kind != ProblemKind::P2)
        throw std::invalid_argument("solve_p2_subproblem: spec.kind must be P2");
    const SpatialCorrelation &corr = *spec.model.corr;
    const double q_prev = quad_form(corr, spec.w_prev);
    if (!(q_prev > 0.0))
        throw std::invalid_argument("solve_p2_subproblem: degenerate anchor (w^H J w == 0), "
                                    "re-initialize the iteration");

    P2Objective obj;
    obj.corr = &corr;
    obj.grad_a = linearize_quadratic(spec.w_prev, corr, 1.0 / std::sqrt(q_prev));
    obj.beta_ae = spec.model.beta_ae;
    obj.sigma2 = spec.model.sigma2;

    const bool no_l1 = spec.weights.empty() || all_zero_weights(spec.weights) ||
                       !std::isfinite(spec.N_budget);
    auto project = [&](const cvec &v) {
        return no_l1 ? project_ball(v, spec.P_A)
                     : project_ball_intersection(v, spec.weights, spec.P_A, spec.N_budget);
    };

    cvec w = project(spec.w_prev);
    double fw = obj.value(w);
    const double grad_scale = std::max(1.0, norm2(obj.gradient(w)));
    const double tol = 1e-7 * grad_scale;

    double step = 1.0;
    int stall = 0;
    for (int it = 0; it < 5000; ++it) {
        const cvec g = obj.gradient(w);
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            cvec trial(w.size());
            for (std::size_t i = 0; i < w.size(); ++i)
                trial[i] = w[i] + step * g[i];
            trial = project(trial);
            double diff2 = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i)
                diff2 += std::norm(trial[i] - w[i]);
            const double ft = obj.value(trial);
            if (ft >= fw + 1e-4 * diff2 / std::max(step, 1e-300)) {
                const double mapping = std::sqrt(diff2) / std::max(step, 1e-300);
                w = std::move(trial);
                const double gain = ft - fw;
                fw = ft;
                accepted = true;
                if (mapping <= tol)
                    return Beamformer::from(w);
                stall = (gain <= 1e-15 * std::max(1.0, std::fabs(fw))) ? stall + 1 : 0;
                break;
            }
            step *= 0.5;
            if (step < 1e-18)
                break;
        }
        if (!accepted || stall > 50)
            break;
        step *= 1.5;
    }
    return Beamformer::from(w);
}

// ---------- outer SCA loop ----------

namespace {

double true_objective(ProblemKind kind, const Beamformer &w, const KgrModel &model) {
    if (kind == ProblemKind::P1)
        return kgr_iid_closed(w, model).bits;
    return evaluate_kgr_bits(w, model, Scenario::correlated);
}

// largest uniform scale keeping s*w feasible (pushes the iterate to the
// boundary; the iid objective is increasing along rays)
double boundary_scale(const cvec &w, const std::vector<double> &weights, double n_budget,
                      double P_A) {
    const double n = norm2(w);
    if (!(n > 0.0))
        return 1.0;
    double s = std::sqrt(P_A) / n;
    if (!weights.empty() && std::isfinite(n_budget)) {
        const double l1 = weighted_l1(w, weights);
        if (l1 > 0.0)
            s = std::min(s, n_budget / l1);
    }
    return s;
}

} // namespace

SolveTrace sca_solve(ProblemKind kind, const Beamformer &init, const std::vector<double> &weights,
                     double n_budget, double P_A, const KgrModel &model,
                     const ScaOptions &options) {
    SolveTrace trace;
    // iterates live on the power boundary (capped by the l1 budget when it
    // binds): the power constraint is active at the optimum of both problems
    Beamformer w = Beamformer::from(
        scaled(init.w, boundary_scale(init.w, weights, n_budget, P_A)));
    double r_prev = true_objective(kind, w, model);
    trace.objective.push_back(r_prev);

    SubproblemSpec spec;
    spec.kind = kind;
    spec.weights = weights;
    spec.P_A = P_A;
    spec.N_budget = n_budget;
    spec.model = model;

    for (int l = 0; l < options.max_iterations; ++l) {
        spec.w_prev = w.w;
        Beamformer star =
            (kind == ProblemKind::P1) ? solve_p1_subproblem(spec) : solve_p2_subproblem(spec);

        // candidate set: blends between anchor and subproblem solution plus
        // their boundary rescalings; keeps the trace monotone even when the
        // surrogate step overshoots the true objective
        Beamformer best = w;
        double r_best = r_prev;
        auto consider = [&](const cvec &cand) {
            Beamformer b = Beamformer::from(cand);
            const double val = true_objective(kind, b, model);
            if (val > r_best) {
                r_best = val;
                best = std::move(b);
            }
        };
        for (double alpha : {1.0, 0.75, 0.5, 0.25}) {
            cvec blend(w.w.size());
            for (std::size_t i = 0; i < blend.size(); ++i)
                blend[i] = w.w[i] + alpha * (star.w[i] - w.w[i]);
            consider(scaled(blend, boundary_scale(blend, weights, n_budget, P_A)));
        }

        w = best;
        trace.objective.push_back(r_best);
        trace.iterations = l + 1;
        if (std::fabs(r_best - r_prev) <= options.eps0) {
            trace.converged = true;
            break;
        }
        r_prev = r_best;
    }
    trace.final_w = w;
    return trace;
}

} // namespace faskeygen
