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

#ifndef FAS_KEYGEN_CHANNEL_HPP
#define FAS_KEYGEN_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "fas_keygen/numerics.hpp"
#include "fas_keygen/rng.hpp"

namespace faskeygen {

using cvec = std::vector<std::complex<double>>;

struct Position {
    double x = 0.0;
    double y = 0.0;
};

enum class EveMode { iid, correlated };

// Scenario parameters, all in linear SI units (watts, meters). The config
// loader converts dBm/dB inputs; nothing below this layer ever sees decibels.
struct SystemConfig {
    int M = 32;                 // pre-set FAS ports
    double W = 0.5;             // normalized aperture size (length = W * lambda)
    int N = 5;                  // RF chains / active ports
    double P_A = 0.1;           // Alice power budget [W]
    double P_B = 0.1;           // Bob power budget [W]
    double sigma2 = 1e-11;      // noise power [W]
    double gamma0 = 1e-3;       // path gain at 1 m (linear)
    double alpha0 = 2.0;        // path-loss exponent
    Position alice_pos{0.0, 0.0};
    Position bob_pos{70.0, 0.0};
    EveMode eve_mode = EveMode::correlated;
    double eve_disk_radius = 10.0; // [m], correlated mode
    double rho = 1.0;              // Eve small-scale correlation coefficient
    double eps0 = 1e-4;            // iterative convergence threshold
    double gamma_reg = 0.0;        // reweighting regularizer (0 = derive default)
    std::uint64_t seed = 1;

    // 0.1 * sqrt(P_A / M): scales with the expected per-port magnitude
    double effective_gamma_reg() const;

    void validate() const; // throws std::invalid_argument with a description
};

// M x M Bessel spatial-correlation matrix with its eigendecomposition and
// clamped square-root factor cached.
struct SpatialCorrelation {
    SymmetricMatrix matrix;
    EigenDecomposition eig;
    RealMatrix sqrt_factor;

    int order() const { return matrix.order(); }
    double lambda_max() const { return eig.values.front(); }
};

struct LinkBudget {
    double beta_ab = 0.0;
    double beta_ae = 0.0;
    double d_ab = 0.0;
    double d_ae = 0.0;
};

struct ChannelDraw {
    cvec h_ab;
    cvec h_ae;
};

// Entry (n,m) = J0(2*pi*|n-m|*W/(M-1)); M == 1 degenerates to [1] without
// ever evaluating the denominator.
SpatialCorrelation build_correlation(int M, double W);

// gamma0 * d^(-alpha0); the model is only valid beyond the reference
// distance, so d < 1 is a domain error.
double path_loss(double d, double gamma0, double alpha0);

double distance(const Position &a, const Position &b);

// Correlated mode: Eve uniform on the disk of radius eve_disk_radius around
// Bob. iid mode: Eve at the mirror of Bob across Alice, so beta_ae ==
// beta_ab (the iid KGR does not depend on Eve, only Monte-Carlo sanity runs
// care). Deterministic given the rng state.
LinkBudget place_eve(const SystemConfig &config, CounterRng &rng);

// h_ab = sqrt(beta_ab) * S * g_b with g_b standard complex Gaussian;
// h_ae = sqrt(beta_ae) * S * (rho*g_b + sqrt(1-rho^2)*g_e).
std::vector<ChannelDraw> sample_channels(const SpatialCorrelation &corr, const LinkBudget &budget,
                                         double rho, int count, CounterRng &rng);

// Single draw appended to out (no allocation churn in streaming loops).
void sample_channel_into(const SpatialCorrelation &corr, const LinkBudget &budget, double rho,
                         CounterRng &rng, ChannelDraw &out);

} // namespace faskeygen

#endif
