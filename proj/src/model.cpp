#include "infoval/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace infoval {

namespace {

std::string format_probs(const numvec& p) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        os << p[i];
    }
    os << "]";
    return os.str();
}

}  // namespace

std::vector<std::string> belief_violations(const numvec& probs) {
    std::vector<std::string> out;
    if (probs.empty()) {
        out.push_back("belief is empty");
        return out;
    }
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= kNegativeTol)) {
            std::ostringstream os;
            os << "belief entry " << i + 1 << " is negative: " << probs[i];
            out.push_back(os.str());
        }
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os << "belief sums to " << sum << ", expected 1";
        out.push_back(os.str());
    }
    return out;
}

Belief::Belief(numvec probs) : p_(std::move(probs)) {
    auto violations = belief_violations(p_);
    if (!violations.empty()) {
        std::string msg = "invalid belief " + format_probs(p_) + ":";
        for (const auto& v : violations) msg += " " + v + ";";
        throw invariant_error(msg);
    }
}

double PomdpModel::emission(int x, int a, int obs, ObsMode mode) const {
    if (mode == ObsMode::background_only) return emit_y(x, a, obs);
    const JointObservation w = decode_joint(obs);
    return emit_y(x, a, w.y) * emit_z(x, w.z);
}

double CostTable::max_cost() const {
    double m = 0.0;
    for (int i = 0; i < n_states * n_actions; ++i)
        m = std::max(m, data[static_cast<size_t>(i)]);
    return m;
}

CostTable agent_costs(const PomdpModel& model) {
    return {model.cost_agent.data(), model.n_states, model.n_actions};
}

CostTable society_costs(const PomdpModel& model) {
    return {model.cost_society.data(), model.n_states, model.n_actions};
}

namespace {

// Checks that a group of rows forms a stochastic table; coordinates in
// messages are 1-based.
void check_rows(const numvec& table, int n_rows_outer, int n_rows_inner,
                int row_len, const std::string& name, bool inner_is_action,
                std::vector<std::string>& out) {
    for (int i = 0; i < n_rows_outer; ++i) {
        for (int j = 0; j < n_rows_inner; ++j) {
            double sum = 0.0;
            bool negative = false;
            const size_t base =
                (static_cast<size_t>(i) * n_rows_inner + j) * row_len;
            for (int k = 0; k < row_len; ++k) {
                const double v = table[base + k];
                if (v < 0.0) negative = true;
                sum += v;
            }
            std::ostringstream coord;
            if (inner_is_action)
                coord << "(x=" << i + 1 << ", a=" << j + 1 << ")";
            else
                coord << "(x=" << i + 1 << ")";
            if (negative)
                out.push_back(name + " row " + coord.str() +
                              " has a negative entry");
            if (std::abs(sum - 1.0) > kStochasticTol) {
                std::ostringstream os;
                os << name << " row " << coord.str() << " sums to " << sum
                   << ", expected 1";
                out.push_back(os.str());
            }
        }
    }
}

}  // namespace

std::vector<std::string> model_violations(const PomdpModel& model) {
    std::vector<std::string> out;
    if (model.n_states <= 0) out.push_back("n_states must be positive");
    if (model.n_actions <= 0) out.push_back("n_actions must be positive");
    if (model.n_obs_background <= 0)
        out.push_back("n_obs_background must be positive");
    if (model.n_obs_additional <= 0)
        out.push_back("n_obs_additional must be positive");
    if (!out.empty()) return out;

    const auto expect_size = [&out](const numvec& t, size_t n,
                                    const std::string& name) {
        if (t.size() != n) {
            std::ostringstream os;
            os << name << " has " << t.size() << " entries, expected " << n;
            out.push_back(os.str());
            return false;
        }
        return true;
    };

    const size_t nx = static_cast<size_t>(model.n_states);
    const size_t na = static_cast<size_t>(model.n_actions);
    const bool sizes_ok =
        expect_size(model.transition, nx * na * nx, "transition") &
        expect_size(model.emission_background,
                    nx * na * static_cast<size_t>(model.n_obs_background),
                    "emission_background") &
        expect_size(model.emission_additional,
                    nx * static_cast<size_t>(model.n_obs_additional),
                    "emission_additional") &
        expect_size(model.cost_agent, nx * na, "cost_agent") &
        expect_size(model.cost_society, nx * na, "cost_society");
    if (!sizes_ok) return out;

    check_rows(model.transition, model.n_states, model.n_actions,
               model.n_states, "transition", true, out);
    check_rows(model.emission_background, model.n_states, model.n_actions,
               model.n_obs_background, "emission_background", true, out);
    check_rows(model.emission_additional, model.n_states, 1,
               model.n_obs_additional, "emission_additional", false, out);

    if (!(model.discount > 0.0 && model.discount < 1.0)) {
        std::ostringstream os;
        os << "discount is " << model.discount << ", expected 0 < gamma < 1";
        out.push_back(os.str());
    }
    return out;
}

void validate_model(const PomdpModel& model) {
    auto violations = model_violations(model);
    if (violations.empty()) return;
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw invariant_error(msg);
}

double joint_emission(const PomdpModel& model, int x, int a, int w) {
    if (x < 0 || x >= model.n_states || a < 0 || a >= model.n_actions ||
        w < 0 || w >= model.n_obs_joint())
        throw std::out_of_range("joint_emission: index out of range");
    return model.emission(x, a, w, ObsMode::joint);
}

double likelihood_additional(const PomdpModel& model, const Belief& b,
                             int z) {
    if (z < 0 || z >= model.n_obs_additional)
        throw std::out_of_range("likelihood_additional: z out of range");
    double sum = 0.0;
    for (int x = 0; x < model.n_states; ++x) sum += model.emit_z(x, z) * b[x];
    return sum;
}

Belief bayes_update_additional(const PomdpModel& model, const Belief& b,
                               int z) {
    const double lik = likelihood_additional(model, b, z);
    if (lik <= 0.0) {
        std::ostringstream os;
        os << "impossible observation: z=" << z + 1
           << " has zero likelihood from belief " << format_probs(b.probs());
        throw impossible_observation(b.probs(), z, os.str());
    }
    numvec post(static_cast<size_t>(model.n_states));
    for (int x = 0; x < model.n_states; ++x)
        post[static_cast<size_t>(x)] = model.emit_z(x, z) * b[x] / lik;
    return Belief::trusted(std::move(post));
}

Belief predict(const PomdpModel& model, const Belief& b, int a) {
    if (a < 0 || a >= model.n_actions)
        throw std::out_of_range("predict: action out of range");
    numvec next(static_cast<size_t>(model.n_states), 0.0);
    for (int x = 0; x < model.n_states; ++x) {
        const double bx = b[x];
        if (bx == 0.0) continue;
        for (int xn = 0; xn < model.n_states; ++xn)
            next[static_cast<size_t>(xn)] += model.trans(x, a, xn) * bx;
    }
    return Belief::trusted(std::move(next));
}

double obs_likelihood(const PomdpModel& model, const Belief& predicted, int a,
                      int obs, ObsMode mode) {
    if (obs < 0 || obs >= model.n_obs(mode))
        throw std::out_of_range("obs_likelihood: observation out of range");
    double sum = 0.0;
    for (int x = 0; x < model.n_states; ++x)
        sum += model.emission(x, a, obs, mode) * predicted[x];
    return sum;
}

Belief transition_update(const PomdpModel& model, const Belief& b, int a,
                         int obs, ObsMode mode) {
    const Belief pred = predict(model, b, a);
    const double lik = obs_likelihood(model, pred, a, obs, mode);
    if (lik <= 0.0) {
        std::ostringstream os;
        os << "impossible observation: obs=" << obs + 1 << " (mode "
           << (mode == ObsMode::background_only ? "background" : "joint")
           << ") has zero likelihood after action " << a + 1
           << " from belief " << format_probs(b.probs());
        throw impossible_observation(b.probs(), obs, os.str());
    }
    numvec post(static_cast<size_t>(model.n_states));
    for (int x = 0; x < model.n_states; ++x)
        post[static_cast<size_t>(x)] =
            model.emission(x, a, obs, mode) * pred[x] / lik;
    return Belief::trusted(std::move(post));
}

double expected_cost(const CostTable& costs, const Belief& b, int a) {
    double sum = 0.0;
    for (int x = 0; x < costs.n_states; ++x) sum += costs(x, a) * b[x];
    return sum;
}

}  // namespace infoval
