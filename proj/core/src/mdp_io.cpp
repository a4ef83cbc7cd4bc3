#include "episarsa/mdp_io.hpp"

#include "episarsa/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace episarsa {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key))
            throw ParseError("mdp document: unknown key '" + key + "' in " + where);
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_array())
        throw ParseError("mdp document: missing or non-array '" + key + "'");
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string()) throw ParseError("mdp document: '" + key + "' entries must be strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

double number_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ParseError("mdp document: missing numeric '" + key + "' in " + where);
    return obj[key].get<double>();
}

std::string string_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw ParseError("mdp document: missing string '" + key + "' in " + where);
    return obj[key].get<std::string>();
}

} // namespace

MdpSpec load_mdp_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("mdp document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("mdp document: top level must be an object");
    reject_unknown_keys(doc, {"states", "terminals", "actions", "transitions", "rewards",
                              "initial", "implicit_sink"},
                        "top level");

    auto states = string_list(doc, "states");
    auto terminals = string_list(doc, "terminals");
    auto actions = string_list(doc, "actions");

    std::vector<MdpSpec::TransitionEntry> transitions;
    if (doc.contains("transitions")) {
        if (!doc["transitions"].is_array()) throw ParseError("mdp document: 'transitions' must be an array");
        for (const auto& e : doc["transitions"]) {
            if (!e.is_object()) throw ParseError("mdp document: transition entries must be objects");
            reject_unknown_keys(e, {"s", "a", "s_next", "p"}, "transition entry");
            transitions.push_back({string_field(e, "s", "transition"), string_field(e, "a", "transition"),
                                   string_field(e, "s_next", "transition"), number_field(e, "p", "transition")});
        }
    }
    std::vector<MdpSpec::RewardEntry> rewards;
    if (doc.contains("rewards")) {
        if (!doc["rewards"].is_array()) throw ParseError("mdp document: 'rewards' must be an array");
        for (const auto& e : doc["rewards"]) {
            if (!e.is_object()) throw ParseError("mdp document: reward entries must be objects");
            reject_unknown_keys(e, {"s", "a", "s_next", "r"}, "reward entry");
            rewards.push_back({string_field(e, "s", "reward"), string_field(e, "a", "reward"),
                               string_field(e, "s_next", "reward"), number_field(e, "r", "reward")});
        }
    }
    std::vector<MdpSpec::InitialEntry> initial;
    if (doc.contains("initial")) {
        if (!doc["initial"].is_array()) throw ParseError("mdp document: 'initial' must be an array");
        for (const auto& e : doc["initial"]) {
            if (!e.is_object()) throw ParseError("mdp document: initial entries must be objects");
            reject_unknown_keys(e, {"s", "p"}, "initial entry");
            initial.push_back({string_field(e, "s", "initial"), number_field(e, "p", "initial")});
        }
    }
    std::optional<std::string> sink;
    if (doc.contains("implicit_sink")) {
        if (!doc["implicit_sink"].is_string())
            throw ParseError("mdp document: 'implicit_sink' must be a string");
        sink = doc["implicit_sink"].get<std::string>();
    }

    return MdpSpec(std::move(states), std::move(terminals), std::move(actions), transitions,
                   rewards, initial, std::move(sink));
}

MdpSpec load_mdp_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mdp file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_mdp_json(buf.str());
}

std::string mdp_to_json(const MdpSpec& spec) {
    json doc;
    doc["states"] = spec.transient_states();
    doc["terminals"] = spec.terminal_states();
    doc["actions"] = spec.actions();
    json transitions = json::array();
    json rewards = json::array();
    for (int s = 0; s < spec.num_transient(); ++s)
        for (int a = 0; a < spec.num_actions(); ++a)
            for (int sn = 0; sn < spec.num_states(); ++sn) {
                if (spec.transition_prob(s, a, sn) != 0.0)
                    transitions.push_back({{"s", spec.transient_states()[s]},
                                           {"a", spec.actions()[a]},
                                           {"s_next", spec.state_id(sn)},
                                           {"p", spec.transition_prob(s, a, sn)}});
                if (spec.reward(s, a, sn) != 0.0)
                    rewards.push_back({{"s", spec.transient_states()[s]},
                                       {"a", spec.actions()[a]},
                                       {"s_next", spec.state_id(sn)},
                                       {"r", spec.reward(s, a, sn)}});
            }
    doc["transitions"] = std::move(transitions);
    doc["rewards"] = std::move(rewards);
    json initial = json::array();
    for (int s = 0; s < spec.num_transient(); ++s)
        if (spec.initial_dist()[s] != 0.0)
            initial.push_back({{"s", spec.transient_states()[s]}, {"p", spec.initial_dist()[s]}});
    doc["initial"] = std::move(initial);
    if (spec.implicit_sink()) doc["implicit_sink"] = *spec.implicit_sink();
    return doc.dump(2);
}

} // namespace episarsa
