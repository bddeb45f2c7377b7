#include "wakeup/wrx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wakeup/fft.hpp"

namespace wakeup {

std::string to_string(NoiseFloorMode m)
{
    return m == NoiseFloorMode::TruncatedMean ? "truncated_mean" : "censored";
}

std::string to_string(NoiseNormalizer n)
{
    return n == NoiseNormalizer::PdpLength ? "pdp_length" : "fft_size";
}

NoiseFloorMode noise_floor_mode_from_string(const std::string& s)
{
    if (s == "truncated_mean")
        return NoiseFloorMode::TruncatedMean;
    if (s == "censored")
        return NoiseFloorMode::Censored;
    throw InvalidParameters("unknown noise floor mode: " + s);
}

NoiseNormalizer noise_normalizer_from_string(const std::string& s)
{
    if (s == "pdp_length")
        return NoiseNormalizer::PdpLength;
    if (s == "fft_size")
        return NoiseNormalizer::FftSize;
    throw InvalidParameters("unknown noise normalizer: " + s);
}

DetectorConfig DetectorConfig::make(double pfa_target, int K_cs, int L)
{
    DetectorConfig c;
    c.L = L;
    c.set_pfa(pfa_target, K_cs);
    return c;
}

void DetectorConfig::set_pfa(double pfa, int K_cs)
{
    pfa_target = pfa;
    gamma_r = solve_gamma_r(pfa, L, K_cs);
    upsilon_r = solve_upsilon_r(pfa);
}

void DetectorConfig::validate() const
{
    require(x >= 1, "x must be at least 1");
    require(a >= 1 && a % 2 == 1, "a must be odd and positive");
    require(L >= 1, "L must be at least 1");
    require(gamma_r > 0 && upsilon_r > 0, "thresholds not initialised");
    require(sync_periods >= 1 && sync_periods <= x, "sync_periods must lie in 1..x");
    require(sync_rho >= 0 && sync_rho <= 1, "sync_rho must lie in [0, 1]");
    require(timing_backoff >= 0, "timing_backoff must be non-negative");
}

namespace {

double wrap_half(double v)
{
    // [-0.5, 0.5)
    v -= std::floor(v + 0.5);
    if (v >= 0.5)
        v -= 1.0;
    return v;
}

SyncEstimate sync_impl(const CVec& stream, const OfdmParams& params, int periods, double rho)
{
    const int N = params.N;
    const int last = N; // candidate starts 0..N
    const Eigen::Index need = last + params.symbol_offset(periods) + params.cp_length(periods) + N;
    CVec r = CVec::Zero(std::max<Eigen::Index>(need, stream.size()));
    r.head(stream.size()) = stream;

    SyncEstimate best;
    double best_metric = -std::numeric_limits<double>::infinity();
    cplx best_gamma{0, 0};
    for (int theta = 0; theta <= last; ++theta) {
        cplx gamma{0, 0};
        double phi = 0;
        for (int j = 1; j <= periods; ++j) {
            const int base = theta + params.symbol_offset(j);
            const int cp = params.cp_length(j);
            for (int k = base; k < base + cp; ++k) {
                gamma += r[k] * std::conj(r[k + N]);
                phi += 0.5 * (std::norm(r[k]) + std::norm(r[k + N]));
            }
        }
        const double metric = std::abs(gamma) - rho * phi;
        if (metric > best_metric) {
            best_metric = metric;
            best_gamma = gamma;
            best.delta_hat = theta;
        }
    }
    best.metric = best_metric;
    best.eps_f_hat = best_gamma == cplx{0, 0} ? 0.0 : wrap_half(-std::arg(best_gamma) / (2 * kPi));
    return best;
}

} // namespace

SyncEstimate stage1_sync(const CVec& window, const OfdmParams& params, double rho)
{
    params.validate();
    const Eigen::Index want = params.cp_length(1) + 2 * params.N;
    if (window.size() < want)
        throw InvalidParameters("window too short for stage-1 sync");
    require(window.size() == want, "stage-1 window must be N_cp + 2N samples");
    return sync_impl(window, params, 1, rho);
}

SyncEstimate stage1_sync(const CVec& stream, const OfdmParams& params, int periods, double rho)
{
    params.validate();
    require(periods >= 1, "periods must be at least 1");
    if (stream.size() < params.cp_length(1) + 2 * params.N)
        throw InvalidParameters("window too short for stage-1 sync");
    return sync_impl(stream, params, periods, rho);
}

CVec derotate(const CVec& stream, double eps_f_hat, int N)
{
    if (eps_f_hat == 0.0)
        return stream;
    CVec out(stream.size());
    for (Eigen::Index n = 0; n < stream.size(); ++n) {
        const double cyc = std::fmod(eps_f_hat * static_cast<double>(n), static_cast<double>(N));
        out[n] = stream[n] * std::polar(1.0, -2 * kPi * cyc / N);
    }
    return out;
}

CVec demap_pdwch(const CVec& symbol_samples, const PdwchLayout& layout, int a)
{
    require(symbol_samples.size() == layout.N, "demap expects exactly N samples");
    require(a >= 1 && a % 2 == 1, "a must be odd");
    const CVec bins = fft<double>(symbol_samples);
    const int h = (a - 1) / 2;
    CVec R(layout.K + a - 1);
    for (int k = -h; k < layout.K + h; ++k)
        R[k + h] = bins[layout.bin(k)];
    return R;
}

RVec compute_pdp(const CVec& R, const CVec& Z, int eps, int L)
{
    const Eigen::Index K = Z.size();
    require(L >= 1, "L must be at least 1");
    require(R.size() >= K && (R.size() - K) % 2 == 0, "R must hold K + a - 1 bins");
    const int h = static_cast<int>((R.size() - K) / 2);
    require(std::abs(eps) <= h, "eps outside the demapped span");
    CVec prod = CVec::Zero(L * K);
    prod.head(K) = R.segment(h + eps, K).cwiseProduct(Z.conjugate());
    return ifft_sum<double>(prod).cwiseAbs2();
}

RVec compute_pdp(const CVec& R, const CVec& Z, int L)
{
    require(R.size() == Z.size(), "R and Z lengths differ");
    return compute_pdp(R, Z, 0, L);
}

double window_energy(const RVec& psi, int m, int L, int K_cs)
{
    const Eigen::Index w = static_cast<Eigen::Index>(L) * K_cs;
    if (m < 0 || (m + 1) * w > psi.size())
        throw std::out_of_range("window index overflow");
    return psi.segment(m * w, w).sum();
}

double upper_gamma_q(int n, double x)
{
    require(n >= 1, "shape must be a positive integer");
    require(x >= 0, "x must be non-negative");
    if (x == 0)
        return 1.0;
    const double lx = std::log(x);
    double sum = 0;
    for (int k = n - 1; k >= 0; --k)
        sum += std::exp(-x + k * lx - std::lgamma(k + 1.0));
    return std::min(1.0, sum);
}

double solve_gamma_r(double pfa, int L, int K_cs)
{
    require(pfa > 0 && pfa < 1, "P_fa must lie in (0, 1)");
    require(L >= 1 && K_cs >= 1, "L and K_cs must be positive");
    const int n = L * K_cs;
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(n));
    int grow = 0;
    while (upper_gamma_q(n, hi) > pfa) {
        lo = hi;
        hi *= 2;
        if (++grow > 60) {
            std::ostringstream os;
            os << "gamma_r bracket failed, last bracket [" << lo << ", " << hi << "]";
            throw ConvergenceError(os.str());
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (upper_gamma_q(n, mid) > pfa)
            lo = mid;
        else
            hi = mid;
    }
    const double g = 0.5 * (lo + hi);
    if (std::abs(upper_gamma_q(n, g) - pfa) > 1e-10) {
        std::ostringstream os;
        os << "gamma_r did not converge, bracket [" << lo << ", " << hi << "]";
        throw ConvergenceError(os.str());
    }
    return g;
}

double solve_upsilon_r(double pfa)
{
    require(pfa > 0 && pfa < 1, "P_fa must lie in (0, 1)");
    return -std::log(pfa);
}

namespace {

double median(std::vector<double> v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

// mean of an exponential truncated at u, as a fraction of u: 1/t - 1/(e^t - 1), t = u/beta
double truncated_ratio(double t)
{
    if (t < 1e-4)
        return 0.5 - t / 12.0;
    return 1.0 / t - 1.0 / std::expm1(t);
}

} // namespace

NoiseFloor estimate_noise_floor(const RVec& psi, double upsilon_r, NoiseFloorMode mode, double normalizer)
{
    require(psi.size() > 0, "empty PDP");
    require(upsilon_r > 0, "upsilon_r must be positive");
    const double norm = normalizer > 0 ? normalizer : static_cast<double>(psi.size());
    NoiseFloor nf;
    nf.threshold = upsilon_r * psi.sum() / norm;

    double acc = 0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (psi[i] < nf.threshold) {
            acc += psi[i];
            ++nf.below;
        }
    }
    auto fallback = [&] {
        nf.fallback = true;
        nf.beta = median(std::vector<double>(psi.data(), psi.data() + psi.size())) / std::log(2.0);
    };
    if (nf.below == 0) {
        fallback();
        return nf;
    }
    const double mean_below = acc / nf.below;
    if (mode == NoiseFloorMode::TruncatedMean) {
        nf.beta = mean_below;
        return nf;
    }
    const double ratio = mean_below / nf.threshold;
    if (!(ratio > 0) || ratio >= truncated_ratio(1e-6)) {
        fallback();
        return nf;
    }
    double lo = 1e-6, hi = 745.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_ratio(mid) > ratio)
            lo = mid;
        else
            hi = mid;
    }
    nf.beta = nf.threshold / (0.5 * (lo + hi));
    return nf;
}

Detector::Detector(DetectorConfig cfg, PdwchGroupConfig pdwch, OfdmParams params)
    : cfg_(cfg), pdwch_(pdwch), params_(params)
{
    cfg_.validate();
    layout_ = plan_layout(pdwch_, params_);
    root_ = gen_root_zc<double>(pdwch_.root, pdwch_.K);
}

DetectionResult Detector::detect(const CVec& stream) const
{
    const int N = params_.N;
    const int h = cfg_.span();
    const SyncEstimate sync = stage1_sync(stream, params_, cfg_.sync_periods, cfg_.sync_rho);
    const CVec r = derotate(stream, sync.eps_f_hat, N);

    DetectionResult res;
    res.delta_hat = sync.delta_hat;
    res.eps_f_hat = sync.eps_f_hat;
    res.window0 = Eigen::MatrixXd::Zero(cfg_.x, cfg_.a);

    RVec best_psi;
    double best = -1.0;
    for (int q = 1; q <= cfg_.x; ++q) {
        const Eigen::Index start =
            sync.delta_hat + params_.symbol_offset(q) + params_.cp_length(q) - cfg_.timing_backoff;
        CVec body = CVec::Zero(N);
        for (int n = 0; n < N; ++n) {
            const Eigen::Index i = start + n;
            if (i >= 0 && i < r.size())
                body[n] = r[i];
        }
        const CVec R = demap_pdwch(body, layout_, cfg_.a);
        // tie order: smallest |eps|, negative first
        for (int mag = 0; mag <= h; ++mag) {
            for (int sgn : {-1, 1}) {
                if (mag == 0 && sgn == 1)
                    continue;
                const int eps = sgn * mag;
                RVec psi = compute_pdp(R, root_.spectrum, eps, cfg_.L);
                const double e0 = window_energy(psi, 0, cfg_.L, pdwch_.K_cs);
                res.window0(q - 1, eps + h) = e0;
                if (e0 > best) {
                    best = e0;
                    best_psi = std::move(psi);
                    res.s_hat = q;
                    res.eps_i_hat = eps;
                }
            }
        }
    }

    const double norm = cfg_.normalizer == NoiseNormalizer::PdpLength ? static_cast<double>(best_psi.size())
                                                                       : static_cast<double>(N);
    const NoiseFloor nf = estimate_noise_floor(best_psi, cfg_.upsilon_r, cfg_.floor_mode, norm);
    res.beta_hat = nf.beta;
    res.floor_fallback = nf.fallback;
    res.threshold = nf.beta * cfg_.gamma_r;
    for (int m = 0; m <= pdwch_.M; ++m)
        res.energies.push_back(window_energy(best_psi, m, cfg_.L, pdwch_.K_cs));
    for (int m = 1; m <= pdwch_.M; ++m)
        res.wi_hat.push_back(res.energies[static_cast<std::size_t>(m)] >= res.threshold ? 1 : 0);
    return res;
}

DetectionResult detect(const CVec& stream, const DetectorConfig& cfg, const PdwchGroupConfig& pdwch,
                       const OfdmParams& params)
{
    return Detector(cfg, pdwch, params).detect(stream);
}

} // namespace wakeup
