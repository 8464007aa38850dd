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

#include "fas_keygen/kgr.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace faskeygen {

namespace {
constexpr double k_inf = std::numeric_limits<double>::infinity();
// A 2x2 estimate covariance whose determinant falls below this fraction of
// the diagonal product is treated as singular (perfect correlation).
constexpr double k_singular_rel = 1e-14;

double log2_ratio(double num, double den) { return std::log2(num) - std::log2(den); }
} // namespace

Beamformer Beamformer::from(cvec v) {
    Beamformer b;
    b.w = std::move(v);
    for (int i = 0; i < (int)b.w.size(); ++i)
        if (std::abs(b.w[i]) > 0.0)
            b.support.push_back(i);
    return b;
}

double Beamformer::power() const {
    double p = 0.0;
    for (const auto &z : w)
        p += std::norm(z);
    return p;
}

double quad_form(const SpatialCorrelation &corr, const cvec &w) {
    const int m = corr.order();
    if ((int)w.size() != m)
        throw std::invalid_argument("quad_form: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        // diagonal entries are real contributions; off-diagonals pairwise add
        // 2*Re(conj(w_i) J_ij w_j)
        acc += corr.matrix.at(i, i) * std::norm(w[i]);
        for (int j = i + 1; j < m; ++j)
            acc += 2.0 * corr.matrix.at(i, j) *
                   (w[i].real() * w[j].real() + w[i].imag() * w[j].imag());
    }
    return acc > 0.0 ? acc : 0.0;
}

CovarianceSet assemble_covariances(const Beamformer &w, const SpatialCorrelation &corr,
                                   const LinkBudget &budget, double P_B, double sigma2,
                                   double rho) {
    const double t = quad_form(corr, w.w);
    const double n2 = w.power();
    CovarianceSet c;
    c.r_aa = P_B * budget.beta_ab * t + n2 * sigma2;
    c.r_bb = budget.beta_ab * t + sigma2;
    c.r_ee = budget.beta_ae * t + sigma2;
    c.r_ab = std::sqrt(P_B) * budget.beta_ab * t;
    c.r_ae = rho * std::sqrt(P_B) * std::sqrt(budget.beta_ab * budget.beta_ae) * t;
    c.r_be = rho * std::sqrt(budget.beta_ab * budget.beta_ae) * t;
    return c;
}

KgrResult kgr_iid_closed(const Beamformer &w, const KgrModel &model) {
    KgrResult res;
    res.scenario = Scenario::iid;
    res.method = "closed_form";
    if (w.is_zero()) {
        res.degenerate = true;
        return res;
    }
    const double t = quad_form(*model.corr, w.w);
    const double n2 = w.power();
    const double s = model.sigma2;
    const double x = model.beta_ab * t;
    const double num = (model.P_B * x + n2 * s) * (x + s);
    const double den = (n2 + model.P_B) * s * x + n2 * s * s;
    res.bits = log2_ratio(num, den);
    return res;
}

// The determinants cancel heavily at high SNR (correlations approach 1), so
// the cofactor arithmetic runs in extended precision.
namespace {

long double norm_l(const std::complex<double> &z) {
    const long double re = z.real(), im = z.imag();
    return re * re + im * im;
}

} // namespace

double kgr_iid_oracle(const CovarianceSet &cov) {
    const long double prod = (long double)cov.r_aa * (long double)cov.r_bb;
    const long double det2 = prod - norm_l(cov.r_ab);
    if (det2 <= (long double)k_singular_rel * prod)
        return k_inf;
    return (double)(std::log2(prod) - std::log2(det2));
}

KgrResult kgr_cc_closed(const Beamformer &w, const KgrModel &model) {
    if (model.rho != 1.0)
        throw std::invalid_argument(
            "kgr_cc_closed: closed form is only valid for rho == 1; use kgr_cc_oracle");
    KgrResult res;
    res.scenario = Scenario::correlated;
    res.method = "closed_form";
    if (w.is_zero()) {
        res.degenerate = true;
        return res;
    }
    const double t = quad_form(*model.corr, w.w);
    const double n2 = w.power();
    const double s = model.sigma2;
    const double h_u = model.beta_ab * t;
    const double h_e = model.beta_ae * t;
    const double h_ue = std::sqrt(model.beta_ab * model.beta_ae) * t;
    const double pb = model.P_B;

    const double num1 =
        pb * h_u * h_e + (pb * h_u + h_e * n2) * s + n2 * s * s - pb * h_ue * h_ue;
    const double num2 = h_u * h_e + (h_u + h_e) * s + s * s - h_ue * h_ue;
    const double den = ((pb + n2) * num2 - pb * s * (h_e + s)) * (h_e + s) * s;
    res.bits = log2_ratio(num1 * num2, den);
    return res;
}

double kgr_cc_oracle(const CovarianceSet &cov) {
    if (!(cov.r_ee > 0.0))
        throw std::invalid_argument("kgr_cc_oracle: R_ee must be > 0");
    const long double aa = cov.r_aa, bb = cov.r_bb, ee = cov.r_ee;
    const long double det_ae = aa * ee - norm_l(cov.r_ae);
    const long double det_be = bb * ee - norm_l(cov.r_be);
    // 3x3 Hermitian determinant by cofactor expansion; the triple product
    // Re(r_ab * r_be * conj(r_ae)) is expanded in extended precision too
    const long double ab_re = cov.r_ab.real(), ab_im = cov.r_ab.imag();
    const long double be_re = cov.r_be.real(), be_im = cov.r_be.imag();
    const long double ae_re = cov.r_ae.real(), ae_im = cov.r_ae.imag();
    const long double p_re = ab_re * be_re - ab_im * be_im;
    const long double p_im = ab_re * be_im + ab_im * be_re;
    const long double cross = p_re * ae_re + p_im * ae_im;
    const long double det3 =
        aa * det_be + 2.0L * cross - bb * norm_l(cov.r_ae) - ee * norm_l(cov.r_ab);
    const long double prod = aa * bb * ee;
    if (det3 <= (long double)k_singular_rel * prod)
        return k_inf;
    return (double)(std::log2(det_ae) + std::log2(det_be) - std::log2(det3) - std::log2(ee));
}

double x0_objective(const Beamformer &w, const KgrModel &model) {
    const double t = quad_form(*model.corr, w.w);
    const double den = model.beta_ae * t + model.sigma2;
    return model.beta_ab * t - (model.beta_ab * model.beta_ae * t * t) / den;
}

double lemma2_f(double x, double P_A, double P_B, double sigma2) {
    const double s = sigma2;
    return ((P_B * x + P_A * s) * (x + s)) / ((P_A * s + P_B * s) * x + P_A * s * s);
}

double kgr_pa_derivative(double x0, double P_A, double P_B, double sigma2) {
    const double s = sigma2;
    const double den = P_A * x0 + P_B * x0 + s;
    return (P_B * x0 + s) * P_B * x0 * x0 / (s * den * den);
}

double evaluate_kgr_bits(const Beamformer &w, const KgrModel &model, Scenario scenario) {
    if (scenario == Scenario::iid)
        return kgr_iid_closed(w, model).bits;
    if (model.rho == 1.0)
        return kgr_cc_closed(w, model).bits;
    // generalized rho: the determinant oracle is the source of truth
    LinkBudget lb;
    lb.beta_ab = model.beta_ab;
    lb.beta_ae = model.beta_ae;
    const CovarianceSet cov =
        assemble_covariances(w, *model.corr, lb, model.P_B, model.sigma2, model.rho);
    return kgr_cc_oracle(cov);
}

double kgr_bits_from_t(double t, double w_norm2, const KgrModel &model, Scenario scenario) {
    const double s = model.sigma2;
    const double n2 = w_norm2;
    if (t <= 0.0 && n2 <= 0.0)
        return 0.0;
    if (scenario == Scenario::iid) {
        const double x = model.beta_ab * t;
        const double num = (model.P_B * x + n2 * s) * (x + s);
        const double den = (n2 + model.P_B) * s * x + n2 * s * s;
        return log2_ratio(num, den);
    }
    if (model.rho == 1.0) {
        const double h_u = model.beta_ab * t;
        const double h_e = model.beta_ae * t;
        const double h_ue = std::sqrt(model.beta_ab * model.beta_ae) * t;
        const double pb = model.P_B;
        const double num1 =
            pb * h_u * h_e + (pb * h_u + h_e * n2) * s + n2 * s * s - pb * h_ue * h_ue;
        const double num2 = h_u * h_e + (h_u + h_e) * s + s * s - h_ue * h_ue;
        const double den = ((pb + n2) * num2 - pb * s * (h_e + s)) * (h_e + s) * s;
        return log2_ratio(num1 * num2, den);
    }
    CovarianceSet c;
    c.r_aa = model.P_B * model.beta_ab * t + n2 * s;
    c.r_bb = model.beta_ab * t + s;
    c.r_ee = model.beta_ae * t + s;
    c.r_ab = std::sqrt(model.P_B) * model.beta_ab * t;
    c.r_ae = model.rho * std::sqrt(model.P_B) * std::sqrt(model.beta_ab * model.beta_ae) * t;
    c.r_be = model.rho * std::sqrt(model.beta_ab * model.beta_ae) * t;
    return kgr_cc_oracle(c);
}

namespace {

struct CovAccumulator {
    double aa = 0.0, bb = 0.0, ee = 0.0;
    std::complex<double> ab{0.0, 0.0}, ae{0.0, 0.0}, be{0.0, 0.0};
    long n = 0;

    void add(std::complex<double> ha, std::complex<double> hb, std::complex<double> he) {
        aa += std::norm(ha);
        bb += std::norm(hb);
        ee += std::norm(he);
        ab += ha * std::conj(hb);
        ae += ha * std::conj(he);
        be += hb * std::conj(he);
        ++n;
    }

    void merge(const CovAccumulator &o) {
        aa += o.aa;
        bb += o.bb;
        ee += o.ee;
        ab += o.ab;
        ae += o.ae;
        be += o.be;
        n += o.n;
    }

    CovarianceSet finish() const {
        CovarianceSet c;
        const double inv = 1.0 / (double)n;
        c.r_aa = aa * inv;
        c.r_bb = bb * inv;
        c.r_ee = ee * inv;
        c.r_ab = ab * inv;
        c.r_ae = ae * inv;
        c.r_be = be * inv;
        return c;
    }
};

// One probing round for one channel realization: Bob and Eve take LS
// estimates of the effective scalar channel, Alice combines her uplink
// vector estimate with the beamformer (noise variance ||w||^2 sigma2).
void probe_once(const ChannelDraw &d, const cvec &w, double P_B, double sigma2, CounterRng &rng,
                CovAccumulator &acc) {
    const int m = (int)w.size();
    const double ns = std::sqrt(sigma2);
    std::complex<double> wh_ab{0.0, 0.0};
    std::complex<double> wh_ae{0.0, 0.0};
    std::complex<double> wz{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
        wh_ab += std::conj(w[i]) * d.h_ab[i];
        wh_ae += std::conj(w[i]) * d.h_ae[i];
        wz += std::conj(w[i]) * (ns * rng.next_cn());
    }
    const std::complex<double> h_a = std::sqrt(P_B) * wh_ab + wz;
    const std::complex<double> h_b = wh_ab + ns * rng.next_cn();
    const std::complex<double> h_e = wh_ae + ns * rng.next_cn();
    acc.add(h_a, h_b, h_e);
}

double finish_empirical(const CovAccumulator &acc, Scenario scenario) {
    const CovarianceSet cov = acc.finish();
    return scenario == Scenario::iid ? kgr_iid_oracle(cov) : kgr_cc_oracle(cov);
}

} // namespace

double empirical_kgr(const std::vector<ChannelDraw> &draws, const Beamformer &w,
                     const KgrModel &model, Scenario scenario, CounterRng &rng) {
    if (draws.size() < 10000)
        throw std::invalid_argument("empirical_kgr: needs at least 10^4 draws");
    CovAccumulator acc;
    for (const auto &d : draws)
        probe_once(d, w.w, model.P_B, model.sigma2, rng, acc);
    return finish_empirical(acc, scenario);
}

double empirical_kgr_streamed(const SpatialCorrelation &corr, const LinkBudget &budget,
                              const Beamformer &w, const KgrModel &model, Scenario scenario,
                              long count, std::uint64_t seed) {
    if (count < 10000)
        throw std::invalid_argument("empirical_kgr_streamed: needs at least 10^4 draws");
    constexpr long k_shard = 16384;
    CovAccumulator acc;
    ChannelDraw d;
    long done = 0;
    std::uint64_t shard = 0;
    while (done < count) {
        const long todo = std::min(k_shard, count - done);
        CounterRng rng(seed + shard);
        for (long i = 0; i < todo; ++i) {
            sample_channel_into(corr, budget, model.rho, rng, d);
            probe_once(d, w.w, model.P_B, model.sigma2, rng, acc);
        }
        done += todo;
        ++shard;
    }
    return finish_empirical(acc, scenario);
}

} // namespace faskeygen
