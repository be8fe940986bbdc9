#pragma once

#include <string>
#include <vector>

#include "mogplan/env/desktop.hpp"
#include "mogplan/grounding/types.hpp"

namespace mogplan::env {

/// Successor state for one grounded action, followed by one clock tick (see advance).
/// Throws OutOfBounds when any point lies off screen and UnknownApp when switching to an
/// application that does not exist; in both cases the input state is untouched.
DesktopState apply(const DesktopState& state, const GroundedAction& action);

/// One clock tick with no action effect: increments step_index and fires the scheduled events
/// whose at_step equals the new index. Used for steps whose action could not be applied.
void advance(DesktopState& state);

/// Runs effects in the context of `app_id`. `popup` names the popup owning the triggering
/// element, if any (used by a bare `dismiss`).
void run_effects(DesktopState& state, const std::string& app_id, const std::vector<Effect>& effects,
                 const std::string& popup = {});

}  // namespace mogplan::env
