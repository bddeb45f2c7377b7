#pragma once

#include <string>
#include <vector>

#include "wakeup/common.hpp"
#include "wakeup/ofdm_link.hpp"
#include "wakeup/zc_signal.hpp"

namespace wakeup {

enum class NoiseFloorMode {
    TruncatedMean, // plain mean of the samples under the threshold
    Censored,      // inverts the truncated-exponential mean
};

enum class NoiseNormalizer {
    PdpLength, // L*K
    FftSize,   // N
};

std::string to_string(NoiseFloorMode m);
std::string to_string(NoiseNormalizer n);
NoiseFloorMode noise_floor_mode_from_string(const std::string& s);
NoiseNormalizer noise_normalizer_from_string(const std::string& s);

struct DetectorConfig {
    int x = 3;
    int a = 5;
    int L = 2;
    double pfa_target = 0.1;
    double gamma_r = 0.0;
    double upsilon_r = 0.0;
    NoiseFloorMode floor_mode = NoiseFloorMode::Censored;
    NoiseNormalizer normalizer = NoiseNormalizer::PdpLength;
    int sync_periods = 3; // CP correlations accumulated over this many symbols
    double sync_rho = 0.5;
    int timing_backoff = 1;

    int span() const { return (a - 1) / 2; }
    // fills gamma_r / upsilon_r from pfa_target
    static DetectorConfig make(double pfa_target, int K_cs, int L = 2);
    void set_pfa(double pfa, int K_cs);
    void validate() const;
};

struct SyncEstimate {
    int delta_hat = 0;
    double eps_f_hat = 0.0;
    double metric = 0.0;
};

// window of exactly N_cp + 2N samples
SyncEstimate stage1_sync(const CVec& window, const OfdmParams& params, double rho = 0.0);
// same estimator with the CP correlation summed over `periods` consecutive symbols
SyncEstimate stage1_sync(const CVec& stream, const OfdmParams& params, int periods, double rho);

CVec derotate(const CVec& stream, double eps_f_hat, int N);

// N time samples (CP removed) -> K + a - 1 bins centred on the PDWCH block
CVec demap_pdwch(const CVec& symbol_samples, const PdwchLayout& layout, int a);

// R has K + a - 1 bins (output of demap_pdwch), eps in [-(a-1)/2, (a-1)/2]
RVec compute_pdp(const CVec& R, const CVec& Z, int eps, int L);
// R has exactly K bins, no frequency hypothesis
RVec compute_pdp(const CVec& R, const CVec& Z, int L);

double window_energy(const RVec& psi, int m, int L, int K_cs);

// Q(n, x) = exp(-x) sum_{k<n} x^k/k!
double upper_gamma_q(int n, double x);
double solve_gamma_r(double pfa, int L, int K_cs);
double solve_upsilon_r(double pfa);

struct NoiseFloor {
    double beta = 0.0;
    double threshold = 0.0; // Upsilon
    int below = 0;
    bool fallback = false;
};

NoiseFloor estimate_noise_floor(const RVec& psi, double upsilon_r,
                                NoiseFloorMode mode = NoiseFloorMode::Censored, double normalizer = 0.0);

struct DetectionResult {
    int s_hat = 0;
    int eps_i_hat = 0;
    double eps_f_hat = 0.0;
    int delta_hat = 0;
    double beta_hat = 0.0;
    double threshold = 0.0; // Gamma
    bool floor_fallback = false;
    std::vector<std::uint8_t> wi_hat;  // wi_hat[m-1]
    std::vector<double> energies;      // E(m), m = 0..M
    Eigen::MatrixXd window0;           // E_q(0, eps), rows q-1, cols eps + span

    bool indicator(int m) const { return wi_hat.at(static_cast<std::size_t>(m - 1)) != 0; }
    double statistic(int m) const { return energies.at(static_cast<std::size_t>(m)) / beta_hat; }
};

class Detector {
public:
    Detector(DetectorConfig cfg, PdwchGroupConfig pdwch, OfdmParams params);

    DetectionResult detect(const CVec& stream) const;

    const DetectorConfig& config() const { return cfg_; }
    const PdwchGroupConfig& pdwch() const { return pdwch_; }
    const OfdmParams& ofdm() const { return params_; }
    const PdwchLayout& layout() const { return layout_; }
    const ZcSequence<double>& root() const { return root_; }

private:
    DetectorConfig cfg_;
    PdwchGroupConfig pdwch_;
    OfdmParams params_;
    PdwchLayout layout_;
    ZcSequence<double> root_;
};

DetectionResult detect(const CVec& stream, const DetectorConfig& cfg, const PdwchGroupConfig& pdwch,
                       const OfdmParams& params);

} // namespace wakeup
