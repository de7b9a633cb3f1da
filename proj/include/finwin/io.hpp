#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "finwin/diagnostics.hpp"
#include "finwin/experiments.hpp"
#include "finwin/finite_mdp.hpp"
#include "finwin/model.hpp"
#include "finwin/quantizer.hpp"
#include "finwin/stability.hpp"

namespace finwin::io {

using nlohmann::json;

/// Model file schema: exactly these keys, nothing else.
inline const std::vector<std::string>& model_keys() {
    static const std::vector<std::string> keys = {
        "n_states", "n_obs",        "n_actions", "transition",      "channel",
        "cost",     "discount",     "state_metric", "prior",        "reference_prior"};
    return keys;
}

inline json model_to_json(const PomdpModel& m) {
    json j;
    j["n_states"] = m.n_states;
    j["n_obs"] = m.n_obs;
    j["n_actions"] = m.n_actions;
    j["transition"] = m.transition;
    j["channel"] = m.channel;
    j["cost"] = m.cost;
    j["discount"] = m.discount;
    j["state_metric"] = m.state_metric;
    j["prior"] = m.prior;
    j["reference_prior"] = m.reference_prior;
    return j;
}

/// Parses a model document, rejecting unknown keys. Shape and stochasticity
/// problems are reported through validate_model, not here.
inline PomdpModel model_from_json(const json& j) {
    if (!j.is_object()) throw Error("model document must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const auto& k : model_keys()) known = known || (k == key);
        if (!known) throw Error("unknown model key: " + key);
    }
    for (const auto& k : model_keys())
        if (!j.contains(k)) throw Error("missing model key: " + k);

    PomdpModel m;
    m.n_states = j.at("n_states").get<int>();
    m.n_obs = j.at("n_obs").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.transition = j.at("transition").get<std::vector<Matrix>>();
    m.channel = j.at("channel").get<Matrix>();
    m.cost = j.at("cost").get<Matrix>();
    m.discount = j.at("discount").get<double>();
    m.state_metric = j.at("state_metric").get<Matrix>();
    m.prior = j.at("prior").get<std::vector<double>>();
    m.reference_prior = j.at("reference_prior").get<std::vector<double>>();
    return m;
}

inline json window_to_json(const HistoryWindow& w) {
    return json{{"observations", w.observations}, {"actions", w.actions}};
}

inline HistoryWindow window_from_json(const json& j) {
    HistoryWindow w;
    w.observations = j.at("observations").get<std::vector<int>>();
    w.actions = j.at("actions").get<std::vector<int>>();
    return w;
}

inline json quantized_set_to_json(const QuantizedBeliefSet& set) {
    json entries = json::array();
    for (const auto& e : set.entries) {
        entries.push_back({{"history", window_to_json(e.history)},
                           {"belief", e.belief.weights},
                           {"reach_probability", e.reach_probability},
                           {"rank", e.rank}});
    }
    return json{{"window_size", set.window_size},
                {"anchor", set.anchor.weights},
                {"entries", entries}};
}

inline QuantizedBeliefSet quantized_set_from_json(const json& j) {
    QuantizedBeliefSet set;
    set.window_size = j.at("window_size").get<int>();
    set.anchor = Belief(j.at("anchor").get<std::vector<double>>());
    for (const auto& e : j.at("entries")) {
        QuantizedBeliefSet::Entry entry;
        entry.history = window_from_json(e.at("history"));
        entry.belief = Belief(e.at("belief").get<std::vector<double>>());
        entry.reach_probability = e.at("reach_probability").get<double>();
        entry.rank = e.at("rank").get<std::uint64_t>();
        set.entries.push_back(std::move(entry));
    }
    return set;
}

inline json solved_policy_to_json(const SolvedPolicy& solved, const QuantizedBeliefSet& set) {
    return json{{"window_size", set.window_size},
                {"states", quantized_set_to_json(set)},
                {"values", solved.values},
                {"policy", solved.policy},
                {"iterations", solved.iteration_count},
                {"residual", solved.residual}};
}

inline json diagnostics_to_json(const DiagnosticsReport& r) {
    json j;
    j["delta_T_per_action"] = r.delta_T_per_action;
    j["delta_T_min"] = r.delta_T_min;
    j["delta_Q"] = r.delta_Q;
    j["alpha"] = r.alpha;
    j["alpha_X"] = r.alpha_X;
    j["alpha_c"] = r.alpha_c;
    j["alpha_ctilde"] = r.alpha_ctilde;
    j["alpha_Z_options"] = {{"bl_plain", r.alpha_Z_options.bl_plain},
                            {"bl_channel", r.alpha_Z_options.bl_channel},
                            {"tv_plain", r.alpha_Z_options.tv_plain},
                            {"tv_channel", r.alpha_Z_options.tv_channel}};
    j["alpha_Z_selected"] = r.alpha_Z_selected;
    j["beta"] = r.beta;
    j["beta_threshold"] = r.beta_threshold;
    j["beta_threshold_alt"] = r.beta_threshold_alt;
    if (r.constants) {
        j["J_BL_bound"] = r.constants->J_BL_bound;
        j["K0"] = r.constants->K0;
        j["K0_hat"] = r.constants->K0_hat;
        j["K"] = r.constants->K;
        json rows = json::array();
        for (const auto& row : r.per_N_bounds)
            rows.push_back({{"N", static_cast<int>(row[0])},
                            {"value_bound", row[1]},
                            {"realized_bound", row[2]}});
        j["per_N_bounds"] = rows;
    } else {
        j["J_BL_bound"] = nullptr;
        j["K0"] = nullptr;
        j["K0_hat"] = nullptr;
        j["K"] = nullptr;
        j["constants_unavailable_reason"] = r.constants_unavailable_reason;
    }
    if (r.asserted_alpha) {
        j["asserted_alpha"] = *r.asserted_alpha;
        j["alpha_assertion_mismatch"] = r.alpha_assertion_mismatch;
    }
    return j;
}

/// Writes content through a temp file and a rename, so readers never observe
/// a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline PomdpModel load_model(const std::filesystem::path& path) {
    return model_from_json(json::parse(read_file(path)));
}

/// Formats a double with 17 significant digits (round-trip exact).
inline std::string number(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

inline std::string stability_curve_csv(const std::vector<DecayCurvePoint>& curve) {
    std::ostringstream out;
    out << "N,mean_tv,se_tv,mean_bl,se_bl,envelope_2_alpha_N\n";
    for (const auto& p : curve)
        out << p.N << ',' << number(p.estimate.mean_tv) << ',' << number(p.estimate.std_error_tv)
            << ',' << number(p.estimate.mean_bl) << ',' << number(p.estimate.std_error_bl) << ','
            << number(p.envelope) << '\n';
    return out.str();
}

inline std::string experiment_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "N,approx_value,realized_cost,value_error,robustness_error,stability_term,"
           "alpha_pow_N\n";
    for (const auto& rec : r.records)
        out << rec.N << ',' << number(rec.approx_value) << ',' << number(rec.realized_cost) << ','
            << number(rec.value_error) << ',' << number(rec.robustness_error) << ','
            << number(rec.filter_stability_term) << ',' << number(rec.alpha_pow_N) << '\n';
    return out.str();
}

inline std::string normalized_csv(const NormalizedCurves& c) {
    std::ostringstream out;
    out << "N,value_error,robustness_error,stability_term,alpha_pow_N\n";
    for (std::size_t i = 0; i < c.N.size(); ++i)
        out << c.N[i] << ',' << number(c.value_error[i]) << ',' << number(c.robustness_error[i])
            << ',' << number(c.stability_term[i]) << ',' << number(c.alpha_pow_N[i]) << '\n';
    return out.str();
}

inline std::string gaussian_table_csv(const std::vector<GaussianTableRow>& rows) {
    std::ostringstream out;
    out << "ratio_t,ratio_q_min,delta_T,delta_Q_hat\n";
    for (const auto& row : rows) {
        out << number(row.ratio_t) << ',';
        if (row.ratio_q_min)
            out << number(*row.ratio_q_min);
        else
            out << "any";
        out << ',' << number(row.delta_T) << ',';
        if (row.delta_Q_hat)
            out << number(*row.delta_Q_hat);
        else
            out << "any";
        out << '\n';
    }
    return out.str();
}

}  // namespace finwin::io
