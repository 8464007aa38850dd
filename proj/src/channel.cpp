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

#include "fas_keygen/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace faskeygen {

double SystemConfig::effective_gamma_reg() const {
    if (gamma_reg > 0.0)
        return gamma_reg;
    return 0.1 * std::sqrt(P_A / (double)M);
}

void SystemConfig::validate() const {
    if (M < 1)
        throw std::invalid_argument("config: M must be >= 1");
    if (N < 1 || N > M)
        throw std::invalid_argument("config: N must satisfy 1 <= N <= M");
    if (!(W > 0.0))
        throw std::invalid_argument("config: W must be > 0");
    if (!(P_A > 0.0) || !(P_B > 0.0))
        throw std::invalid_argument("config: power budgets must be > 0");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("config: noise power must be > 0");
    if (!(gamma0 > 0.0))
        throw std::invalid_argument("config: gamma0 must be > 0");
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("config: rho must be in [0, 1]");
    if (!(eps0 > 0.0))
        throw std::invalid_argument("config: eps0 must be > 0");
    if (gamma_reg < 0.0)
        throw std::invalid_argument("config: gamma_reg must be >= 0");
    if (eve_mode == EveMode::correlated && !(eve_disk_radius > 0.0))
        throw std::invalid_argument("config: correlated mode needs eve_disk_radius > 0");
}

SpatialCorrelation build_correlation(int M, double W) {
    if (M < 1)
        throw std::invalid_argument("build_correlation: M must be >= 1");
    if (!(W > 0.0))
        throw std::invalid_argument("build_correlation: W must be > 0");

    SymmetricMatrix j(M);
    if (M == 1) {
        j.set(0, 0, 1.0);
    } else {
        const double step = 2.0 * M_PI * W / (double)(M - 1);
        for (int n = 0; n < M; ++n)
            for (int m = n; m < M; ++m)
                j.set(n, m, bessel_j0(step * (double)(m - n)));
    }

    SpatialCorrelation corr;
    corr.matrix = j;
    corr.eig = sym_eig(j);
    corr.sqrt_factor = psd_sqrt(j);
    return corr;
}

double path_loss(double d, double gamma0, double alpha0) {
    if (!(d >= 1.0))
        throw std::domain_error("path_loss: model requires d >= 1 m");
    return gamma0 * std::pow(d, -alpha0);
}

double distance(const Position &a, const Position &b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

LinkBudget place_eve(const SystemConfig &config, CounterRng &rng) {
    LinkBudget lb;
    lb.d_ab = distance(config.alice_pos, config.bob_pos);
    lb.beta_ab = path_loss(lb.d_ab, config.gamma0, config.alpha0);

    Position eve;
    if (config.eve_mode == EveMode::correlated) {
        const double r = config.eve_disk_radius * std::sqrt(rng.next_uniform());
        const double theta = 2.0 * M_PI * rng.next_uniform();
        eve.x = config.bob_pos.x + r * std::cos(theta);
        eve.y = config.bob_pos.y + r * std::sin(theta);
    } else {
        eve.x = 2.0 * config.alice_pos.x - config.bob_pos.x;
        eve.y = 2.0 * config.alice_pos.y - config.bob_pos.y;
    }
    lb.d_ae = distance(config.alice_pos, eve);
    lb.beta_ae = path_loss(lb.d_ae, config.gamma0, config.alpha0);
    return lb;
}

void sample_channel_into(const SpatialCorrelation &corr, const LinkBudget &budget, double rho,
                         CounterRng &rng, ChannelDraw &out) {
    const int m = corr.order();
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double sab = std::sqrt(budget.beta_ab);
    const double sae = std::sqrt(budget.beta_ae);

    thread_local cvec g_b, g_shared;
    g_b.resize(m);
    g_shared.resize(m);
    for (int i = 0; i < m; ++i) {
        g_b[i] = rng.next_cn();
        g_shared[i] = rho * g_b[i] + rho_c * rng.next_cn();
    }

    out.h_ab.assign(m, {0.0, 0.0});
    out.h_ae.assign(m, {0.0, 0.0});
    const RealMatrix &s = corr.sqrt_factor;
    for (int i = 0; i < m; ++i) {
        std::complex<double> ab{0.0, 0.0};
        std::complex<double> ae{0.0, 0.0};
        for (int k = 0; k < m; ++k) {
            ab += s.at(i, k) * g_b[k];
            ae += s.at(i, k) * g_shared[k];
        }
        out.h_ab[i] = sab * ab;
        out.h_ae[i] = sae * ae;
    }
}

std::vector<ChannelDraw> sample_channels(const SpatialCorrelation &corr, const LinkBudget &budget,
                                         double rho, int count, CounterRng &rng) {
    if (count < 1)
        throw std::invalid_argument("sample_channels: count must be >= 1");
    std::vector<ChannelDraw> draws(count);
    for (int i = 0; i < count; ++i)
        sample_channel_into(corr, budget, rho, rng, draws[i]);
    return draws;
}

} // namespace faskeygen
