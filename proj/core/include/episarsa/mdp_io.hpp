#pragma once

#include "episarsa/mdp.hpp"

#include <filesystem>
#include <string>

namespace episarsa {

/// Parses the MDP spec document format:
///
///   {
///     "states":      ["s0", ...],                       transient states
///     "terminals":   ["t", ...],
///     "actions":     ["a0", ...],
///     "transitions": [{"s":..,"a":..,"s_next":..,"p":..}, ...],
///     "rewards":     [{"s":..,"a":..,"s_next":..,"r":..}, ...],
///     "initial":     [{"s":..,"p":..}, ...],
///     "implicit_sink": "t"                               optional
///   }
///
/// Unlisted transitions/rewards are 0. Unknown keys are rejected.
/// Throws ParseError on malformed documents; identifier and probability
/// problems surface through validate() on the returned spec.
MdpSpec load_mdp_json(const std::string& text);
MdpSpec load_mdp_file(const std::filesystem::path& path);

/// Inverse of load_mdp_json (used by discount_transform round-trips and tools).
std::string mdp_to_json(const MdpSpec& spec);

} // namespace episarsa
