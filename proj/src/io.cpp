#include "infoval/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

namespace infoval {

using nlohmann::json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write file: " + path);
    out << doc.dump(2) << "\n";
}

// Flattens a nested numeric array, checking the declared shape.
numvec flatten(const json& node, const std::vector<int>& dims,
               const std::string& name) {
    numvec flat;
    size_t total = 1;
    for (int d : dims) total *= static_cast<size_t>(d);
    flat.reserve(total);

    const std::function<void(const json&, size_t)> walk =
        [&](const json& j, size_t depth) {
            if (depth == dims.size()) {
                if (!j.is_number())
                    throw parse_error(name + ": expected a number");
                flat.push_back(j.get<double>());
                return;
            }
            if (!j.is_array() ||
                j.size() != static_cast<size_t>(dims[depth]))
                throw parse_error(name + ": expected an array of length " +
                                  std::to_string(dims[depth]) +
                                  " at depth " + std::to_string(depth + 1));
            for (const auto& child : j) walk(child, depth + 1);
        };
    walk(node, 0);
    return flat;
}

json nest(const numvec& flat, const std::vector<int>& dims) {
    size_t pos = 0;
    const std::function<json(size_t)> build = [&](size_t depth) -> json {
        json arr = json::array();
        if (depth == dims.size() - 1) {
            for (int i = 0; i < dims[depth]; ++i)
                arr.push_back(flat[pos++]);
        } else {
            for (int i = 0; i < dims[depth]; ++i)
                arr.push_back(build(depth + 1));
        }
        return arr;
    };
    return build(0);
}

template <typename T>
T get_field(const json& doc, const std::string& key,
            const std::string& path) {
    if (!doc.contains(key))
        throw parse_error(path + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw parse_error(path + ": field '" + key + "': " + e.what());
    }
}

}  // namespace

PomdpModel load_model(const std::string& path) {
    const json doc = read_json(path);
    PomdpModel m;
    m.n_states = get_field<int>(doc, "n_states", path);
    m.n_actions = get_field<int>(doc, "n_actions", path);
    m.n_obs_background = get_field<int>(doc, "n_obs_background", path);
    m.n_obs_additional = get_field<int>(doc, "n_obs_additional", path);
    if (m.n_states <= 0 || m.n_actions <= 0 || m.n_obs_background <= 0 ||
        m.n_obs_additional <= 0)
        throw parse_error(path + ": cardinalities must be positive");
    m.discount = get_field<double>(doc, "discount", path);

    const int nx = m.n_states, na = m.n_actions;
    const auto field = [&](const char* key) -> const json& {
        if (!doc.contains(key))
            throw parse_error(path + ": missing field '" +
                              std::string(key) + "'");
        return doc.at(key);
    };
    m.transition = flatten(field("transition"), {nx, na, nx}, "transition");
    m.emission_background =
        flatten(field("emission_background"), {nx, na, m.n_obs_background},
                "emission_background");
    m.emission_additional =
        flatten(field("emission_additional"), {nx, m.n_obs_additional},
                "emission_additional");
    m.cost_agent = flatten(field("cost_agent"), {nx, na}, "cost_agent");
    m.cost_society = flatten(field("cost_society"), {nx, na}, "cost_society");

    validate_model(m);
    return m;
}

void save_model(const std::string& path, const PomdpModel& m) {
    json doc;
    doc["n_states"] = m.n_states;
    doc["n_actions"] = m.n_actions;
    doc["n_obs_background"] = m.n_obs_background;
    doc["n_obs_additional"] = m.n_obs_additional;
    doc["discount"] = m.discount;
    const int nx = m.n_states, na = m.n_actions;
    doc["transition"] = nest(m.transition, {nx, na, nx});
    doc["emission_background"] =
        nest(m.emission_background, {nx, na, m.n_obs_background});
    doc["emission_additional"] =
        nest(m.emission_additional, {nx, m.n_obs_additional});
    doc["cost_agent"] = nest(m.cost_agent, {nx, na});
    doc["cost_society"] = nest(m.cost_society, {nx, na});
    write_json(path, doc);
}

void save_alpha_set(const std::string& path, const AlphaSet& set) {
    json doc;
    doc["mode"] =
        set.mode == ObsMode::background_only ? "background" : "joint";
    json vectors = json::array();
    for (const auto& v : set.vectors) {
        json entry;
        entry["id"] = v.id + 1;
        entry["action"] = v.action + 1;
        entry["values"] = v.values;
        vectors.push_back(std::move(entry));
    }
    doc["vectors"] = std::move(vectors);
    write_json(path, doc);
}

AlphaSet load_alpha_set(const std::string& path) {
    const json doc = read_json(path);
    AlphaSet set;
    const auto mode = get_field<std::string>(doc, "mode", path);
    if (mode == "background")
        set.mode = ObsMode::background_only;
    else if (mode == "joint")
        set.mode = ObsMode::joint;
    else
        throw parse_error(path + ": unknown mode '" + mode + "'");
    if (!doc.contains("vectors") || !doc.at("vectors").is_array())
        throw parse_error(path + ": missing 'vectors' array");
    for (const auto& entry : doc.at("vectors")) {
        AlphaVector v;
        v.id = get_field<int>(entry, "id", path) - 1;
        v.action = get_field<int>(entry, "action", path) - 1;
        v.values = get_field<numvec>(entry, "values", path);
        set.vectors.push_back(std::move(v));
    }
    return set;
}

DeteriorationSpec load_scenario_spec(const std::string& path) {
    const json doc = read_json(path);
    DeteriorationSpec spec;
    const auto maybe = [&](const char* key, auto& target) {
        if (doc.contains(key)) {
            try {
                target = doc.at(key)
                             .get<std::remove_reference_t<decltype(target)>>();
            } catch (const json::exception& e) {
                throw parse_error(path + ": field '" + std::string(key) +
                                  "': " + e.what());
            }
        }
    };
    maybe("p12", spec.p12);
    maybe("p23", spec.p23);
    maybe("repair_cost_agent", spec.repair_cost_agent);
    maybe("repair_cost_society", spec.repair_cost_society);
    maybe("sigma", spec.sigma);
    maybe("n_z_bins", spec.n_z_bins);
    maybe("z_half_range", spec.z_half_range);
    maybe("discount", spec.discount);
    maybe("printed_middle_row", spec.printed_middle_row);
    const auto violations = spec_violations(spec);
    if (!violations.empty()) {
        std::string msg = path + ": invalid scenario spec:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw invariant_error(msg);
    }
    return spec;
}

void save_scenario_spec(const std::string& path,
                        const DeteriorationSpec& spec) {
    json doc;
    doc["p12"] = spec.p12;
    doc["p23"] = spec.p23;
    doc["repair_cost_agent"] = spec.repair_cost_agent;
    doc["repair_cost_society"] = spec.repair_cost_society;
    doc["sigma"] = spec.sigma;
    doc["n_z_bins"] = spec.n_z_bins;
    doc["z_half_range"] = spec.z_half_range;
    doc["discount"] = spec.discount;
    doc["printed_middle_row"] = spec.printed_middle_row;
    write_json(path, doc);
}

void save_controller(const std::string& path, const Controller& ctrl) {
    json doc;
    doc["mode"] =
        ctrl.mode == ObsMode::background_only ? "background" : "joint";
    doc["grid_method"] = ctrl.grid_method;
    json states = json::array();
    for (int h = 0; h < ctrl.n_inner(); ++h) {
        const auto& s = ctrl.states[static_cast<size_t>(h)];
        json entry;
        entry["h"] = h + 1;
        entry["action"] = s.action + 1;
        entry["rep_belief"] = s.rep_belief.probs();
        json eta_row = json::array();
        for (int obs = 0; obs < ctrl.n_obs; ++obs) {
            const int next = ctrl.eta[static_cast<size_t>(h) * ctrl.n_obs +
                                      obs];
            eta_row.push_back(next < 0 ? -1 : next + 1);
        }
        entry["eta"] = std::move(eta_row);
        states.push_back(std::move(entry));
    }
    doc["inner_states"] = std::move(states);
    write_json(path, doc);
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw parse_error("cannot write file: " + path);
    }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& names) {
    row(names);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->out << ",";
        impl_->out << cells[i];
    }
    impl_->out << "\n";
}

void CsvWriter::row_numeric(const std::vector<double>& cells) {
    std::vector<std::string> formatted;
    formatted.reserve(cells.size());
    for (double c : cells) formatted.push_back(format_number(c));
    row(formatted);
}

void save_chain_csv(const std::string& path, const JointChain& chain) {
    CsvWriter csv(path);
    std::vector<std::string> head = {"x", "h", "cost", "value"};
    for (int s = 0; s < chain.n_joint(); ++s)
        head.push_back("t_" + std::to_string(s % chain.n_states + 1) + "_" +
                       std::to_string(s / chain.n_states + 1));
    csv.header(head);
    for (int s = 0; s < chain.n_joint(); ++s) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(s % chain.n_states + 1));
        cells.push_back(std::to_string(s / chain.n_states + 1));
        cells.push_back(format_number(chain.cost(s)));
        cells.push_back(format_number(chain.value(s)));
        for (int sn = 0; sn < chain.n_joint(); ++sn)
            cells.push_back(format_number(chain.transition(s, sn)));
        csv.row(cells);
    }
}

}  // namespace infoval
