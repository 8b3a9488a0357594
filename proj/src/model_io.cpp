#include "rmdp/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "rmdp/games.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

namespace {

using json = nlohmann::ordered_json;

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
}

/// Numbers may be written as JSON numbers or as decimal strings; strings
/// keep full precision through tools that mangle floats.
prec_t number_from(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<prec_t>();
    if (v.is_string()) {
        const std::string& s = v.get_ref<const std::string&>();
        prec_t out = 0.0;
        const char* last = s.data() + s.size();
        const auto [ptr, ec] = std::from_chars(s.data(), last, out);
        if (ec != std::errc{} || ptr != last || !std::isfinite(out))
            throw FormatError(where + ": '" + s + "' is not a finite decimal number");
        return out;
    }
    throw FormatError(where + ": expected a number or a decimal string");
}

long integer_from(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw FormatError(where + ": expected an integer");
    return v.get<long>();
}

const json& member(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(where + ": missing field '" + key + "'");
    return *it;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) throw FormatError(where + ": unknown field '" + it.key() + "'");
    }
}

struct NameIndex {
    std::vector<std::string> names;
    std::unordered_map<std::string, long> index;
};

NameIndex name_index(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty())
        throw FormatError(where + ": expected a nonempty array of names");
    NameIndex out;
    for (const auto& v : arr) {
        if (!v.is_string() || v.get_ref<const std::string&>().empty())
            throw FormatError(where + ": names must be nonempty strings");
        std::string name = v.get<std::string>();
        if (!out.index.emplace(name, static_cast<long>(out.names.size())).second)
            throw FormatError(where + ": duplicate name '" + name + "'");
        out.names.push_back(std::move(name));
    }
    return out;
}

long lookup(const NameIndex& idx, const std::string& name, const std::string& where) {
    const auto it = idx.index.find(name);
    if (it == idx.index.end()) throw FormatError(where + ": unknown name '" + name + "'");
    return it->second;
}

struct FileFrame {
    NameIndex states;
    NameIndex actions;
    long initial = 0;
    prec_t discount = 0.0;
};

/// Dense [state][action] view of a {state: {action: value}} object.
using Cells = std::vector<std::vector<const json*>>;

Cells pair_table(const json& obj, const FileFrame& f, const std::string& where) {
    if (!obj.is_object()) throw FormatError(where + ": expected an object keyed by state names");
    Cells cells(f.states.names.size(),
                std::vector<const json*>(f.actions.names.size(), nullptr));
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const long s = lookup(f.states, it.key(), where);
        if (!it.value().is_object())
            throw FormatError(where + "." + it.key() + ": expected an object keyed by action names");
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
            cells[s][lookup(f.actions, jt.key(), where + "." + it.key())] = &jt.value();
    }
    return cells;
}

std::vector<indvec> enabled_from(const Cells& cells) {
    std::vector<indvec> enabled(cells.size());
    for (size_t s = 0; s < cells.size(); ++s)
        for (size_t a = 0; a < cells[s].size(); ++a)
            if (cells[s][a]) enabled[s].push_back(static_cast<long>(a));
    return enabled;
}

void check_same_coverage(const Cells& payload, const Cells& rewards, const FileFrame& f,
                         const char* payload_name) {
    for (size_t s = 0; s < payload.size(); ++s)
        for (size_t a = 0; a < payload[s].size(); ++a)
            if ((payload[s][a] != nullptr) != (rewards[s][a] != nullptr))
                throw FormatError(std::string("rewards and ") + payload_name +
                                  " must list the same state-action pairs; mismatch at state '" +
                                  f.states.names[s] + "', action '" + f.actions.names[a] + "'");
}

Transition transition_from(const json& obj, const NameIndex& states, const std::string& where) {
    if (!obj.is_object())
        throw FormatError(where + ": expected an object of successor probabilities");
    std::vector<std::pair<long, prec_t>> entries;
    entries.reserve(obj.size());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        entries.emplace_back(lookup(states, it.key(), where),
                             number_from(it.value(), where + "." + it.key()));
    std::sort(entries.begin(), entries.end());
    Transition tran;
    for (const auto& [succ, prob] : entries) {
        tran.succs.push_back(succ);
        tran.probs.push_back(prob);
    }
    return tran;
}

/// Sparse successor map as a dense vector over all states; absent states
/// are zero.
numvec dense_from(const json& obj, const NameIndex& states, const std::string& where) {
    if (!obj.is_object())
        throw FormatError(where + ": expected an object of per-state numbers");
    numvec out(states.names.size(), 0.0);
    for (auto it = obj.begin(); it != obj.end(); ++it)
        out[lookup(states, it.key(), where)] = number_from(it.value(), where + "." + it.key());
    return out;
}

numvec vector_from(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw FormatError(where + ": expected an array of numbers");
    numvec out;
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i)
        out.push_back(number_from(arr[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<SparseRow> rows_from(const json& arr, long dim, const std::string& where) {
    if (!arr.is_array()) throw FormatError(where + ": expected an array of coefficient rows");
    std::vector<SparseRow> out;
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string row_where = where + "[" + std::to_string(i) + "]";
        const numvec dense = vector_from(arr[i], row_where);
        if (static_cast<long>(dense.size()) != dim)
            throw FormatError(row_where + ": expected " + std::to_string(dim) +
                              " coefficients, got " + std::to_string(dense.size()));
        out.push_back(sparse_from_dense(dense));
    }
    return out;
}

Polytope polytope_from(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw FormatError(where + ": expected a polytope object");
    check_keys(obj, {"dim", "rows", "rhs", "eq_rows", "eq_rhs", "lifted_split"}, where);
    Polytope p;
    p.dim = integer_from(member(obj, "dim", where), where + ".dim");
    if (p.dim <= 0) throw FormatError(where + ".dim: must be positive");
    p.rows = rows_from(member(obj, "rows", where), p.dim, where + ".rows");
    p.rhs = vector_from(member(obj, "rhs", where), where + ".rhs");
    if (p.rhs.size() != p.rows.size())
        throw FormatError(where + ": rhs length does not match the number of rows");
    const bool has_eq = obj.contains("eq_rows"), has_eq_rhs = obj.contains("eq_rhs");
    if (has_eq != has_eq_rhs)
        throw FormatError(where + ": eq_rows and eq_rhs must appear together");
    if (has_eq) {
        p.eq_rows = rows_from(obj["eq_rows"], p.dim, where + ".eq_rows");
        p.eq_rhs = vector_from(obj["eq_rhs"], where + ".eq_rhs");
        if (p.eq_rhs.size() != p.eq_rows.size())
            throw FormatError(where + ": eq_rhs length does not match the number of eq_rows");
    }
    if (obj.contains("lifted_split"))
        p.lifted_split = integer_from(obj["lifted_split"], where + ".lifted_split");
    return p;
}

// *******************************************************
// Kind-specific parsers
// *******************************************************

Mdp parse_mdp_kind(const json& doc, const FileFrame& f) {
    const Cells cells = pair_table(member(doc, "transitions", "model"), f, "transitions");
    const Cells reward_cells = pair_table(member(doc, "rewards", "model"), f, "rewards");
    check_same_coverage(cells, reward_cells, f, "transitions");

    Mdp m;
    m.state_names = f.states.names;
    m.action_names = f.actions.names;
    m.initial_state = f.initial;
    m.discount = f.discount;
    m.enabled = enabled_from(cells);
    const size_t n = f.states.names.size(), na = f.actions.names.size();
    m.transitions.assign(n, std::vector<Transition>(na));
    m.rewards.assign(n, numvec(na, 0.0));
    for (size_t s = 0; s < n; ++s)
        for (size_t a = 0; a < na; ++a)
            if (cells[s][a]) {
                const std::string where =
                    "transitions." + f.states.names[s] + "." + f.actions.names[a];
                m.transitions[s][a] = transition_from(*cells[s][a], f.states, where);
                m.rewards[s][a] = number_from(*reward_cells[s][a], "rewards." + f.states.names[s] +
                                                                       "." + f.actions.names[a]);
            }
    validate_mdp(m);
    return m;
}

/// Shared shell for the robust kinds: walks the payload cells, builds one
/// polytope per enabled pair via make_polytope(cell, where), and checks the
/// result's structural invariants.
template <typename MakePolytope>
Rmdp parse_robust_kind(const json& doc, const FileFrame& f, const char* payload_key,
                       MakePolytope make_polytope) {
    const Cells cells = pair_table(member(doc, payload_key, "model"), f, payload_key);
    const Cells reward_cells = pair_table(member(doc, "rewards", "model"), f, "rewards");
    check_same_coverage(cells, reward_cells, f, payload_key);

    Rmdp r;
    r.state_names = f.states.names;
    r.action_names = f.actions.names;
    r.initial_state = f.initial;
    r.discount = f.discount;
    r.enabled = enabled_from(cells);
    const size_t n = f.states.names.size(), na = f.actions.names.size();
    r.uncertainty.assign(n, std::vector<Polytope>(na));
    r.rewards.assign(n, numvec(na, 0.0));
    for (size_t s = 0; s < n; ++s)
        for (size_t a = 0; a < na; ++a)
            if (cells[s][a]) {
                const std::string where =
                    std::string(payload_key) + "." + f.states.names[s] + "." + f.actions.names[a];
                r.uncertainty[s][a] = make_polytope(*cells[s][a], where);
                r.rewards[s][a] = number_from(*reward_cells[s][a], "rewards." + f.states.names[s] +
                                                                       "." + f.actions.names[a]);
            }
    validate_rmdp(r);
    return r;
}

DiscountedGame parse_game_kind(const json& doc, const FileFrame& f) {
    const Cells cells = pair_table(member(doc, "successors", "model"), f, "successors");
    const Cells reward_cells = pair_table(member(doc, "rewards", "model"), f, "rewards");
    check_same_coverage(cells, reward_cells, f, "successors");

    DiscountedGame g;
    g.state_names = f.states.names;
    g.action_names = f.actions.names;
    g.initial_state = f.initial;
    g.discount = f.discount;
    const size_t n = f.states.names.size(), na = f.actions.names.size();
    g.successors.assign(n, std::vector<indvec>(na));
    g.rewards.assign(n, numvec(na, 0.0));
    for (size_t s = 0; s < n; ++s)
        for (size_t a = 0; a < na; ++a)
            if (cells[s][a]) {
                const std::string where =
                    "successors." + f.states.names[s] + "." + f.actions.names[a];
                const json& arr = *cells[s][a];
                if (!arr.is_array()) throw FormatError(where + ": expected an array of state names");
                indvec succs;
                for (const auto& v : arr) {
                    if (!v.is_string()) throw FormatError(where + ": expected state names");
                    succs.push_back(lookup(f.states, v.get<std::string>(), where));
                }
                std::sort(succs.begin(), succs.end());
                if (std::adjacent_find(succs.begin(), succs.end()) != succs.end())
                    throw FormatError(where + ": duplicate successor");
                g.successors[s][a] = std::move(succs);
                g.rewards[s][a] = number_from(*reward_cells[s][a], "rewards." + f.states.names[s] +
                                                                       "." + f.actions.names[a]);
            }
    validate_game(g);
    return g;
}

// *******************************************************
// Renderers
// *******************************************************

json frame_json(const std::vector<std::string>& state_names,
                const std::vector<std::string>& action_names, const char* kind, long initial,
                prec_t discount) {
    json doc = json::object();
    doc["format_version"] = "1";
    doc["kind"] = kind;
    doc["states"] = state_names;
    doc["actions"] = action_names;
    doc["initial"] = state_names[initial];
    doc["discount"] = discount;
    return doc;
}

template <typename Model>
json rewards_json(const Model& m) {
    json out = json::object();
    for (long s = 0; s < m.num_states(); ++s) {
        json row = json::object();
        for (long a : m.enabled[s]) row[m.action_names[a]] = m.rewards[s][a];
        out[m.state_names[s]] = std::move(row);
    }
    return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Mdp: return "mdp";
    case ModelKind::RmdpPolytope: return "rmdp-polytope";
    case ModelKind::Imdp: return "imdp";
    case ModelKind::L1: return "l1";
    case ModelKind::Linf: return "linf";
    case ModelKind::Game: return "game";
    }
    return "unknown";
}

ParsedModel parse_model(const std::string& text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw FormatError("model: top level must be a JSON object");

    const json& version = member(doc, "format_version", "model");
    if (!version.is_string() || version.get_ref<const std::string&>() != "1")
        throw FormatError("model: format_version must be the string \"1\"");

    const json& kind_tag = member(doc, "kind", "model");
    if (!kind_tag.is_string()) throw FormatError("model: kind must be a string");
    const std::string tag = kind_tag.get<std::string>();

    ModelKind kind;
    const char* payload_key;
    if (tag == "mdp") {
        kind = ModelKind::Mdp;
        payload_key = "transitions";
    } else if (tag == "rmdp-polytope") {
        kind = ModelKind::RmdpPolytope;
        payload_key = "polytopes";
    } else if (tag == "imdp") {
        kind = ModelKind::Imdp;
        payload_key = "intervals";
    } else if (tag == "l1") {
        kind = ModelKind::L1;
        payload_key = "balls";
    } else if (tag == "linf") {
        kind = ModelKind::Linf;
        payload_key = "balls";
    } else if (tag == "game") {
        kind = ModelKind::Game;
        payload_key = "successors";
    } else {
        throw FormatError("model: unknown kind '" + tag + "'");
    }

    check_keys(doc,
               {"format_version", "kind", "states", "actions", "initial", "discount", "rewards",
                payload_key},
               "model");

    FileFrame f;
    f.states = name_index(member(doc, "states", "model"), "states");
    f.actions = name_index(member(doc, "actions", "model"), "actions");
    const json& initial = member(doc, "initial", "model");
    if (!initial.is_string()) throw FormatError("initial: expected a state name");
    f.initial = lookup(f.states, initial.get<std::string>(), "initial");
    f.discount = number_from(member(doc, "discount", "model"), "discount");

    switch (kind) {
    case ModelKind::Mdp: return {kind, parse_mdp_kind(doc, f)};
    case ModelKind::RmdpPolytope:
        return {kind, parse_robust_kind(doc, f, payload_key, [](const json& cell,
                                                                const std::string& where) {
                    return polytope_from(cell, where);
                })};
    case ModelKind::Imdp:
        return {kind, parse_robust_kind(doc, f, payload_key,
                                        [&f](const json& cell, const std::string& where) {
                                            check_keys(cell, {"lower", "upper"}, where);
                                            return imdp_to_polytope(
                                                dense_from(member(cell, "lower", where), f.states,
                                                           where + ".lower"),
                                                dense_from(member(cell, "upper", where), f.states,
                                                           where + ".upper"));
                                        })};
    case ModelKind::L1:
    case ModelKind::Linf:
        return {kind, parse_robust_kind(
                          doc, f, payload_key,
                          [&f, kind](const json& cell, const std::string& where) {
                              check_keys(cell, {"center", "radius"}, where);
                              const numvec center = dense_from(member(cell, "center", where),
                                                               f.states, where + ".center");
                              const prec_t radius =
                                  number_from(member(cell, "radius", where), where + ".radius");
                              return kind == ModelKind::L1
                                         ? l1_to_lifted_polytope(center, radius)
                                         : imdp_to_polytope(linf_to_imdp(center, radius));
                          })};
    case ModelKind::Game: return {kind, parse_game_kind(doc, f)};
    }
    throw FormatError("model: unknown kind");
}

ParsedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

std::string render_model(const Mdp& mdp) {
    json doc = frame_json(mdp.state_names, mdp.action_names, "mdp", mdp.initial_state,
                          mdp.discount);
    doc["rewards"] = rewards_json(mdp);
    json transitions = json::object();
    for (long s = 0; s < mdp.num_states(); ++s) {
        json row = json::object();
        for (long a : mdp.enabled[s]) {
            json cell = json::object();
            const Transition& tran = mdp.transitions[s][a];
            for (size_t i = 0; i < tran.size(); ++i)
                cell[mdp.state_names[tran.succs[i]]] = tran.probs[i];
            row[mdp.action_names[a]] = std::move(cell);
        }
        transitions[mdp.state_names[s]] = std::move(row);
    }
    doc["transitions"] = std::move(transitions);
    return doc.dump(2) + "\n";
}

std::string render_model(const Rmdp& rmdp) {
    json doc = frame_json(rmdp.state_names, rmdp.action_names, "rmdp-polytope",
                          rmdp.initial_state, rmdp.discount);
    doc["rewards"] = rewards_json(rmdp);
    json polytopes = json::object();
    for (long s = 0; s < rmdp.num_states(); ++s) {
        json row = json::object();
        for (long a : rmdp.enabled[s]) {
            const Polytope& p = rmdp.uncertainty[s][a];
            json cell = json::object();
            cell["dim"] = p.dim;
            json rows = json::array();
            for (const SparseRow& r : p.rows) rows.push_back(json(r.dense(p.dim)));
            cell["rows"] = std::move(rows);
            cell["rhs"] = p.rhs;
            if (!p.eq_rows.empty()) {
                json eq_rows = json::array();
                for (const SparseRow& r : p.eq_rows) eq_rows.push_back(json(r.dense(p.dim)));
                cell["eq_rows"] = std::move(eq_rows);
                cell["eq_rhs"] = p.eq_rhs;
            }
            if (p.lifted_split) cell["lifted_split"] = *p.lifted_split;
            row[rmdp.action_names[a]] = std::move(cell);
        }
        polytopes[rmdp.state_names[s]] = std::move(row);
    }
    doc["polytopes"] = std::move(polytopes);
    return doc.dump(2) + "\n";
}

std::string render_model(const DiscountedGame& game) {
    json doc = frame_json(game.state_names, game.action_names, "game", game.initial_state,
                          game.discount);
    json rewards = json::object();
    json successors = json::object();
    for (long s = 0; s < game.num_states(); ++s) {
        json reward_row = json::object();
        json succ_row = json::object();
        for (long a = 0; a < game.num_actions(); ++a) {
            reward_row[game.action_names[a]] = game.rewards[s][a];
            json names = json::array();
            for (long succ : game.successors[s][a]) names.push_back(game.state_names[succ]);
            succ_row[game.action_names[a]] = std::move(names);
        }
        rewards[game.state_names[s]] = std::move(reward_row);
        successors[game.state_names[s]] = std::move(succ_row);
    }
    doc["rewards"] = std::move(rewards);
    doc["successors"] = std::move(successors);
    return doc.dump(2) + "\n";
}

Rmdp parsed_to_rmdp(const ParsedModel& parsed) {
    switch (parsed.kind) {
    case ModelKind::Mdp: return mdp_as_degenerate_rmdp(std::get<Mdp>(parsed.model));
    case ModelKind::Game: return game_to_rmdp(std::get<DiscountedGame>(parsed.model));
    default: return std::get<Rmdp>(parsed.model);
    }
}

Policy parse_policy(const std::string& text, const std::vector<std::string>& state_names,
                    const std::vector<std::string>& action_names) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw FormatError("policy file: top level must be a JSON object");
    check_keys(doc, {"format_version", "policy"}, "policy file");
    const json& version = member(doc, "format_version", "policy file");
    if (!version.is_string() || version.get_ref<const std::string&>() != "1")
        throw FormatError("policy file: format_version must be the string \"1\"");
    const json& body = member(doc, "policy", "policy file");
    if (!body.is_object()) throw FormatError("policy: expected an object keyed by state names");

    NameIndex states, actions;
    states.names = state_names;
    for (size_t i = 0; i < state_names.size(); ++i)
        states.index.emplace(state_names[i], static_cast<long>(i));
    actions.names = action_names;
    for (size_t i = 0; i < action_names.size(); ++i)
        actions.index.emplace(action_names[i], static_cast<long>(i));

    Policy out(state_names.size(), -1);
    for (auto it = body.begin(); it != body.end(); ++it) {
        const long s = lookup(states, it.key(), "policy");
        if (!it.value().is_string())
            throw FormatError("policy." + it.key() + ": expected an action name");
        out[s] = lookup(actions, it.value().get<std::string>(), "policy." + it.key());
    }
    for (size_t s = 0; s < out.size(); ++s)
        if (out[s] < 0)
            throw FormatError("policy: no action for state '" + state_names[s] + "'");
    return out;
}

std::string render_policy(const Policy& policy, const std::vector<std::string>& state_names,
                          const std::vector<std::string>& action_names) {
    if (policy.size() != state_names.size())
        throw ModelError("policy length does not match state count");
    json doc = json::object();
    doc["format_version"] = "1";
    json body = json::object();
    for (size_t s = 0; s < policy.size(); ++s) {
        if (policy[s] < 0 || policy[s] >= static_cast<long>(action_names.size()))
            throw ModelError("policy picks an action index out of range");
        body[state_names[s]] = action_names[policy[s]];
    }
    doc["policy"] = std::move(body);
    return doc.dump(2) + "\n";
}

}  // namespace rmdp
