#pragma once

#include <functional>
#include <vector>

#include "infoval/model.hpp"
#include "infoval/pbvi.hpp"

namespace infoval {

/// Value function over beliefs (total on the belief domain).
using ValueFn = std::function<double(const Belief&)>;

/// Availability assumption for future additional information. Pessimistic
/// pairs with the background-only value of pi_A; optimistic with the joint
/// value of pi_B.
enum class Availability { pessimistic, optimistic };

/// Expectation of value_fn over the posterior beliefs induced by the
/// additional observation; zero-likelihood outcomes are skipped.
double pre_posterior(const PomdpModel& model, const ValueFn& value_fn,
                     const Belief& b);

/// Value of current information: value_fn(b) - pre_posterior(value_fn, b).
double voi_current(const PomdpModel& model, const ValueFn& value_fn,
                   const Belief& b, Availability assumption);

/// Value of following pi_A now and pi_B afterwards, with additional
/// information available at all future steps.
double v_mixed(const PomdpModel& model, const BeliefPolicyFn& pi_a,
               const CostTable& costs, const ValueFn& v_w_pi_b,
               const Belief& b);

/// Equivalent immediate cost of the flow recursion:
/// v_mixed(b) - pre_posterior(v_w_pi_b, b).
double delta_c(const PomdpModel& model, const BeliefPolicyFn& pi_a,
               const CostTable& costs, const ValueFn& v_w_pi_b,
               const Belief& b);

/// Residual of the recursive identity for the value of flow of
/// information; small values certify it numerically.
double flow_recursion_residual(const PomdpModel& model,
                               const BeliefPolicyFn& pi_a,
                               const ValueFn& voi_flow,
                               const ValueFn& delta_c_fn, const Belief& b);

struct ExpectedVoi {
    double voi_current_optimistic = 0.0;
    double delta_v = 0.0;
    double voi_flow = 0.0;
};

/// Expectations under an inner-state distribution, with representative
/// beliefs as the belief proxy; the flow expectation accumulates the other
/// two through the discount factor.
ExpectedVoi expected_voi(const numvec& inner_weights,
                         const numvec& voi_current_optimistic,
                         const numvec& delta_v, double discount);

/// One row of the value-of-information table at a grid belief.
struct VoiCurveRow {
    double p_dam = 0.0;  // NaN off the damage segment (failure vertex)
    double v_y = 0.0;    // agent value, policy pi_A, background only
    double u_y = 0.0;
    double v_w = 0.0;    // agent value, policy pi_B, joint information
    double u_w = 0.0;
    double voi_current_pessimistic = 0.0;
    double voi_current_optimistic = 0.0;
    double voi_flow = 0.0;
    double delta_c = 0.0;
    double delta_v = 0.0;
};

struct VoiCurve {
    std::vector<VoiCurveRow> rows;
};

}  // namespace infoval
