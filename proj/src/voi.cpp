#include "infoval/voi.hpp"

namespace infoval {

double pre_posterior(const PomdpModel& model, const ValueFn& value_fn,
                     const Belief& b) {
    double acc = 0.0;
    for (int z = 0; z < model.n_obs_additional; ++z) {
        const double lik = likelihood_additional(model, b, z);
        if (lik <= 0.0) continue;
        acc += lik * value_fn(bayes_update_additional(model, b, z));
    }
    return acc;
}

double voi_current(const PomdpModel& model, const ValueFn& value_fn,
                   const Belief& b, Availability) {
    return value_fn(b) - pre_posterior(model, value_fn, b);
}

double v_mixed(const PomdpModel& model, const BeliefPolicyFn& pi_a,
               const CostTable& costs, const ValueFn& v_w_pi_b,
               const Belief& b) {
    const int a = pi_a(b);
    double acc = expected_cost(costs, b, a);
    const Belief pred = predict(model, b, a);
    const int n_w = model.n_obs_joint();
    double disc = 0.0;
    for (int w = 0; w < n_w; ++w) {
        const double lik = obs_likelihood(model, pred, a, w, ObsMode::joint);
        if (lik <= 0.0) continue;
        numvec post(static_cast<size_t>(model.n_states));
        for (int x = 0; x < model.n_states; ++x)
            post[static_cast<size_t>(x)] =
                model.emission(x, a, w, ObsMode::joint) * pred[x] / lik;
        disc += lik * v_w_pi_b(Belief::trusted(std::move(post)));
    }
    return acc + model.discount * disc;
}

double delta_c(const PomdpModel& model, const BeliefPolicyFn& pi_a,
               const CostTable& costs, const ValueFn& v_w_pi_b,
               const Belief& b) {
    return v_mixed(model, pi_a, costs, v_w_pi_b, b) -
           pre_posterior(model, v_w_pi_b, b);
}

double flow_recursion_residual(const PomdpModel& model,
                               const BeliefPolicyFn& pi_a,
                               const ValueFn& voi_flow,
                               const ValueFn& delta_c_fn, const Belief& b) {
    const int a = pi_a(b);
    const Belief pred = predict(model, b, a);
    double acc = 0.0;
    for (int y = 0; y < model.n_obs_background; ++y) {
        const double lik =
            obs_likelihood(model, pred, a, y, ObsMode::background_only);
        if (lik <= 0.0) continue;
        numvec post(static_cast<size_t>(model.n_states));
        for (int x = 0; x < model.n_states; ++x)
            post[static_cast<size_t>(x)] =
                model.emit_y(x, a, y) * pred[x] / lik;
        acc += lik * voi_flow(Belief::trusted(std::move(post)));
    }
    return voi_flow(b) - (delta_c_fn(b) + model.discount * acc);
}

ExpectedVoi expected_voi(const numvec& inner_weights,
                         const numvec& voi_current_optimistic,
                         const numvec& delta_v, double discount) {
    if (inner_weights.size() != voi_current_optimistic.size() ||
        inner_weights.size() != delta_v.size())
        throw invariant_error("expected_voi: mismatched table sizes");
    ExpectedVoi out;
    for (size_t h = 0; h < inner_weights.size(); ++h) {
        out.voi_current_optimistic +=
            inner_weights[h] * voi_current_optimistic[h];
        out.delta_v += inner_weights[h] * delta_v[h];
    }
    out.voi_flow =
        (out.voi_current_optimistic + out.delta_v) / (1.0 - discount);
    return out;
}

}  // namespace infoval
