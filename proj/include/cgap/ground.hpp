#pragma once

// Grounding: instantiate a program's rules, neighborhood templates and the
// vertex choice rule over the vertex domain.  Rule instantiation is
// fact-driven for edge-typed condition atoms: a binding is only explored
// where an edge fact with sufficient weight exists.  Variables not bound by
// any such atom range over the whole vertex domain, guarded by a size cap.

#include <memory>

#include "cgap/model.hpp"

namespace cgap {

struct GroundOptions {
  std::int64_t cap = kGroundCap;  // max ground rule instances
};

// Grounds `prog` as-is.  The program must validate and its vertex domain
// (interned vertex constants) must be non-empty.
GroundProgram ground(Program prog, const GroundOptions& opts = {});

// Merges the social network's facts into the program, then grounds.
GroundProgram ground(Program prog, const SocialNetwork& sn,
                     const GroundOptions& opts = {});

}  // namespace cgap
