#pragma once

#include <string>

#include "auth/eval.hpp"

namespace auth {

inline constexpr int kProfileSchemaVersion = 1;

// Single JSON document with an explicit schema_version. Doubles are written
// in shortest round-trip form, so a loaded profile scores any vector with
// exactly the same bits as the original. Training-only bulk (cluster
// assignments, inertia history) is not persisted.
void save_profile(const UserProfile& profile, const std::string& path);

UserProfile load_profile(const std::string& path);

}  // namespace auth
