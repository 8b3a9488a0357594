#pragma once

// JSON model files. One self-describing format covers plain MDPs, robust
// MDPs with explicit polytopes, interval and ball shorthands, and
// discounted-sum games; see the README for the schema. Interval and ball
// kinds are converted to their canonical polytopes while parsing, so every
// robust kind comes back as an Rmdp.

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// A model or policy file does not parse: invalid JSON, a missing or
/// unknown field, a malformed number, or a name that does not resolve.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

enum class ModelKind { Mdp, RmdpPolytope, Imdp, L1, Linf, Game };

/// The kind tag as it appears in files: "mdp", "rmdp-polytope", "imdp",
/// "l1", "linf", "game".
std::string to_string(ModelKind kind);

struct ParsedModel {
    ModelKind kind;
    std::variant<Mdp, Rmdp, DiscountedGame> model;
};

/// Parses a model file. Probabilities, rewards, radii and the discount can
/// be JSON numbers or decimal strings; the latter survive tools that
/// round-trip JSON through lower-precision floats. Structural invariants
/// are checked on the result, so a shape-valid file with, say, a
/// non-stochastic row still fails (with ModelError rather than
/// FormatError). Polytope geometry is not checked here; run
/// validate_rmdp_polytopes or the validate command for that.
ParsedModel parse_model(const std::string& text);

/// parse_model on the contents of a file.
ParsedModel load_model(const std::string& path);

std::string render_model(const Mdp& mdp);
std::string render_model(const Rmdp& rmdp);
std::string render_model(const DiscountedGame& game);

/// The parsed model as input for the robust solvers: a plain MDP embeds as
/// a degenerate RMDP, robust kinds are already polytopic, and a game
/// reduces to the RMDP whose robust value is its max-min value.
Rmdp parsed_to_rmdp(const ParsedModel& parsed);

/// Policy files map every state name to an enabled action name:
///     {"format_version": "1", "policy": {"s0": "up", ...}}
Policy parse_policy(const std::string& text, const std::vector<std::string>& state_names,
                    const std::vector<std::string>& action_names);

std::string render_policy(const Policy& policy, const std::vector<std::string>& state_names,
                          const std::vector<std::string>& action_names);

}  // namespace rmdp
