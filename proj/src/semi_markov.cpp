#include "wakeup/semi_markov.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace wakeup {

void PowerProfile::validate() const
{
    for (double p : PW)
        require(p >= 0, "state powers must be non-negative");
    require(e_su >= 0 && e_pd >= 0, "transition energies must be non-negative");
    require(t_su >= 0 && t_pd >= 0, "transition times must be non-negative");
}

int WakeupSystemParams::wake_cycles() const
{
    if (N_w > 0)
        return N_w;
    return std::max(1, static_cast<int>(std::floor(wake_timer / t_c + 1e-9)));
}

void WakeupSystemParams::validate() const
{
    require(t_c > 0 && t_on > 0, "t_c and t_on must be positive");
    require(t_sl() > 0, "t_on must be shorter than t_c");
    require(t_of >= 0 && T_ON >= 0 && T_I >= 0, "timers must be non-negative");
    require(N_w >= 0, "N_w must be non-negative");
    require(N_w > 0 || wake_timer > 0, "wake-up timer must be positive");
    require(P_fa >= 0 && P_fa <= 1 && P_md >= 0 && P_md <= 1, "error probabilities must lie in [0, 1]");
}

void WakeupSystemParams::validate(const PowerProfile& profile) const
{
    validate();
    profile.validate();
    require(t_of >= profile.t_su, "t_of must be at least t_su");
}

namespace {

double cdf(double lambda, double t)
{
    return -std::expm1(-lambda * t);
}

// 1 - e^{-x}(1 + x), accurate for small x
double one_minus_poisson2(double x)
{
    if (x < 0.1) {
        double term = x; // x^k / k! running
        double sum = 0;
        for (int k = 2; k < 30; ++k) {
            term *= x / k;
            sum += (k % 2 == 0 ? 1.0 : -1.0) * (k - 1) * term;
        }
        return sum;
    }
    return -std::expm1(-x) - x * std::exp(-x);
}

} // namespace

double truncated_exp_mean(double lambda, double T)
{
    return cdf(lambda, T) / lambda;
}

double exp_first_moment(double lambda, double T)
{
    return one_minus_poisson2(lambda * T) / lambda;
}

double exp_linear_weight(double c, double lambda, double T)
{
    return c * cdf(lambda, T) - exp_first_moment(lambda, T);
}

double empty_cycle_probability(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    const double tsl = sys.t_sl();
    const double fpc = cdf(tr.lambda_pc, tsl);
    const double fs = cdf(tr.lambda_s, tsl);
    return ((1 - fpc) * (1 - sys.P_fa) + fpc * sys.P_md) * tr.p_os() +
           ((1 - fs) * (1 - sys.P_fa) + fs * sys.P_md) * tr.p_ns();
}

double wake_run_probability(const WakeupSystemParams& sys, const TrafficParams& tr, int u)
{
    require(u >= 0, "G(u) needs u >= 0");
    return std::pow(empty_cycle_probability(sys, tr), u);
}

TransitionMatrix transition_probs(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    sys.validate();
    tr.validate();
    const double pos = tr.p_os(), pns = tr.p_ns();
    const double tsl = sys.t_sl();

    TransitionMatrix P = TransitionMatrix::Zero();
    P(0, 1) = cdf(tr.lambda_pc, sys.T_ON) * pos + cdf(tr.lambda_s, sys.T_ON) * pns;
    P(0, 3) = 1 - P(0, 1);
    P(1, 1) = cdf(tr.lambda_pc, sys.T_I) * pos + cdf(tr.lambda_s, sys.T_I) * pns;
    P(1, 3) = 1 - P(1, 1);
    const double fpc = cdf(tr.lambda_pc, tsl), fs = cdf(tr.lambda_s, tsl);
    P(2, 0) = ((1 - fpc) * pos + (1 - fs) * pns) * sys.P_fa + (fpc * pos + fs * pns) * (1 - sys.P_md);
    P(2, 3) = 1 - P(2, 0);
    P(3, 0) = wake_run_probability(sys, tr, sys.wake_cycles());
    P(3, 2) = 1 - P(3, 0);
    return P;
}

void check_transition_matrix(const TransitionMatrix& P)
{
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
            require(P(i, j) >= 0 && P(i, j) <= 1, "transition probabilities must lie in [0, 1]");
        require(std::abs(P.row(i).sum() - 1) < 1e-12, "transition rows must sum to 1");
    }
}

Eigen::Vector4d steady_state_closed_form(const TransitionMatrix& P)
{
    const double P01 = P(0, 1), P11 = P(1, 1), P20 = P(2, 0), P30 = P(3, 0), P32 = P(3, 2);
    const double A = P32 * P20 + P30;
    Eigen::Vector4d pk;
    pk[3] = (1 - P11) / (A * (1 + P01 - P11) + (1 - P11) * (1 + P32));
    pk[0] = pk[3] * A;
    pk[1] = pk[3] * P01 * A / (1 - P11);
    pk[2] = pk[3] * P32;
    return pk;
}

Eigen::Vector4d steady_state_balance(const TransitionMatrix& P)
{
    Eigen::Matrix4d A = P.transpose() - Eigen::Matrix4d::Identity();
    A.row(3).setOnes();
    Eigen::Vector4d b(0, 0, 0, 1);
    return A.fullPivLu().solve(b);
}

Eigen::Vector4d steady_state(const TransitionMatrix& P, double tol)
{
    check_transition_matrix(P);
    const Eigen::Vector4d closed = steady_state_closed_form(P);
    const Eigen::Vector4d solved = steady_state_balance(P);
    const double diff = (closed - solved).cwiseAbs().maxCoeff();
    if (!(diff <= tol)) {
        std::ostringstream os;
        os << "closed-form steady state disagrees with balance solve by " << diff;
        throw InconsistentMatrix(os.str());
    }
    return closed;
}

double inactivity_mean(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    return tr.p_os() * truncated_exp_mean(tr.lambda_pc, sys.T_I) +
           tr.p_ns() * truncated_exp_mean(tr.lambda_s, sys.T_I);
}

Eigen::Vector4d holding_times(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    Eigen::Vector4d w;
    w[0] = tr.p_os() * truncated_exp_mean(tr.lambda_pc, sys.T_ON) +
           tr.p_ns() * truncated_exp_mean(tr.lambda_s, sys.T_ON);
    w[1] = tr.eta_pc / tr.lambda_p + inactivity_mean(sys, tr);
    w[2] = sys.t_on;
    w[3] = sys.t_sl();
    return w;
}

TransitionalCost transitional_cost(const TransitionMatrix& P, const Eigen::Vector4d& Pk,
                                   const WakeupSystemParams& sys, const PowerProfile& pr)
{
    TransitionalCost c;
    const double wake = Pk[2] * P(2, 0);
    const double forced = Pk[3] * P(3, 0);
    const double down = Pk[1] * P(1, 3) + Pk[0] * P(0, 3);
    c.e_t = wake * (pr.PW[3] * (sys.t_of - pr.t_su) + pr.e_su) + forced * pr.e_su + down * pr.e_pd;
    c.t_t = wake * sys.t_of + forced * pr.t_su + down * pr.t_pd;
    return c;
}

double avg_power(const WakeupSystemParams& sys, const TrafficParams& tr, const PowerProfile& profile)
{
    return solve_semi_markov(sys, tr, profile).avg_power;
}

namespace {

// int_0^T (c - t)(P_os f_pc + P_ns f_s) dt
double mixture_weight(const TrafficParams& tr, double c, double T)
{
    return tr.p_os() * exp_linear_weight(c, tr.lambda_pc, T) + tr.p_ns() * exp_linear_weight(c, tr.lambda_s, T);
}

double mixture_mass(const TrafficParams& tr, double T)
{
    return tr.p_os() * cdf(tr.lambda_pc, T) + tr.p_ns() * cdf(tr.lambda_s, T);
}

} // namespace

double delay_d1(const WakeupSystemParams& sys, const TrafficParams& tr, int u)
{
    const int Nw = sys.wake_cycles();
    require(u >= 1 && u <= Nw, "d1 index outside 1..N_w");
    const double tsl = sys.t_sl();
    const int last = Nw - u + 1;
    double d = 0;
    for (int n = 1; n <= last; ++n)
        d += (1 - sys.P_md) * std::pow(sys.P_md, n - 1) * mixture_weight(tr, n * sys.t_c + sys.t_of, tsl);
    d += std::pow(sys.P_md, last) * mixture_weight(tr, last * sys.t_c + sys.t_of, tsl);
    return d;
}

double delay_d2(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    return mixture_weight(tr, sys.t_of, sys.t_of);
}

double avg_delay(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    const TransitionMatrix P = transition_probs(sys, tr);
    const Eigen::Vector4d Pk = steady_state(P);
    const int Nw = sys.wake_cycles();
    const double g = empty_cycle_probability(sys, tr);
    double acc = 0;
    for (int u = 1; u <= Nw; ++u)
        acc += std::pow(g, u - 1) * delay_d1(sys, tr, u);
    acc += std::pow(g, Nw) * delay_d2(sys, tr);
    return (Pk[2] + Pk[3]) * acc;
}

namespace {

double conditional_delay(const WakeupSystemParams& sys, const TrafficParams& tr)
{
    const int Nw = sys.wake_cycles();
    const double g = empty_cycle_probability(sys, tr);
    double num = 0, den = 0;
    for (int u = 1; u <= Nw; ++u) {
        num += std::pow(g, u - 1) * delay_d1(sys, tr, u);
        den += std::pow(g, u - 1) * mixture_mass(tr, sys.t_sl());
    }
    num += std::pow(g, Nw) * delay_d2(sys, tr);
    den += std::pow(g, Nw) * mixture_mass(tr, sys.t_of);
    return den > 0 ? num / den : 0.0;
}

} // namespace

SemiMarkovSolution solve_semi_markov(const WakeupSystemParams& sys, const TrafficParams& tr,
                                     const PowerProfile& profile)
{
    sys.validate(profile);
    SemiMarkovSolution s;
    s.N_w = sys.wake_cycles();
    s.P_kl = transition_probs(sys, tr);
    s.P_k = steady_state(s.P_kl);
    s.omega_k = holding_times(sys, tr);
    const TransitionalCost c = transitional_cost(s.P_kl, s.P_k, sys, profile);
    s.e_t = c.e_t;
    s.t_t = c.t_t;
    double energy = s.e_t, time = s.t_t;
    for (int k = 0; k < 4; ++k) {
        energy += s.P_k[k] * s.omega_k[k] * profile.PW[static_cast<std::size_t>(k)];
        time += s.P_k[k] * s.omega_k[k];
    }
    s.avg_power = energy / time;
    s.avg_delay = avg_delay(sys, tr);
    s.avg_delay_conditional = conditional_delay(sys, tr);
    return s;
}

} // namespace wakeup
