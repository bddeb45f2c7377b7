#pragma once

#include <array>

#include "wakeup/common.hpp"
#include "wakeup/traffic.hpp"

namespace wakeup {

struct PowerProfile {
    std::array<double, 4> PW{0.850, 0.850, 0.057, 0.016}; // W, states S0..S3
    double e_su = 4.6e-3; // J
    double e_pd = 3.1e-3; // J
    double t_su = 12e-3;  // s
    double t_pd = 8e-3;   // s

    void validate() const;
};

struct WakeupSystemParams {
    double t_c = 10e-3;
    double t_on = 1e-3;
    double t_of = 15e-3;
    double T_ON = 1e-3;
    double T_I = 12e-3;
    int N_w = 0; // 0 = derive from the 600 ms wake-up timer
    double P_fa = 0.1;
    double P_md = 0.01;
    double wake_timer = 0.6; // s, used when N_w == 0

    double t_sl() const { return t_c - t_on; }
    int wake_cycles() const;
    void validate() const;
    void validate(const PowerProfile& profile) const;
};

using TransitionMatrix = Eigen::Matrix4d;

struct SemiMarkovSolution {
    TransitionMatrix P_kl = TransitionMatrix::Zero();
    Eigen::Vector4d P_k = Eigen::Vector4d::Zero();
    Eigen::Vector4d omega_k = Eigen::Vector4d::Zero();
    double avg_power = 0.0;
    double avg_delay = 0.0;
    double avg_delay_conditional = 0.0; // per packet arriving while asleep
    double e_t = 0.0;
    double t_t = 0.0;
    int N_w = 0;
};

// integral primitives over exponential densities
double truncated_exp_mean(double lambda, double T);              // E[min(t, T)]
double exp_first_moment(double lambda, double T);                // int_0^T t f(t) dt
double exp_linear_weight(double c, double lambda, double T);     // int_0^T (c - t) f(t) dt

// per-cycle probability of decoding WI = 0
double empty_cycle_probability(const WakeupSystemParams& sys, const TrafficParams& tr);
double wake_run_probability(const WakeupSystemParams& sys, const TrafficParams& tr, int u); // G(u)

TransitionMatrix transition_probs(const WakeupSystemParams& sys, const TrafficParams& tr);
void check_transition_matrix(const TransitionMatrix& P);

Eigen::Vector4d steady_state_closed_form(const TransitionMatrix& P);
Eigen::Vector4d steady_state_balance(const TransitionMatrix& P);
// closed form, cross-checked against the balance solve
Eigen::Vector4d steady_state(const TransitionMatrix& P, double tol = 1e-12);

double inactivity_mean(const WakeupSystemParams& sys, const TrafficParams& tr); // E[t_i]
Eigen::Vector4d holding_times(const WakeupSystemParams& sys, const TrafficParams& tr);

struct TransitionalCost {
    double e_t = 0.0;
    double t_t = 0.0;
};
TransitionalCost transitional_cost(const TransitionMatrix& P, const Eigen::Vector4d& Pk,
                                   const WakeupSystemParams& sys, const PowerProfile& profile);

double avg_power(const WakeupSystemParams& sys, const TrafficParams& tr, const PowerProfile& profile);

double delay_d1(const WakeupSystemParams& sys, const TrafficParams& tr, int u);
double delay_d2(const WakeupSystemParams& sys, const TrafficParams& tr);
double avg_delay(const WakeupSystemParams& sys, const TrafficParams& tr);

SemiMarkovSolution solve_semi_markov(const WakeupSystemParams& sys, const TrafficParams& tr,
                                     const PowerProfile& profile);

} // namespace wakeup
