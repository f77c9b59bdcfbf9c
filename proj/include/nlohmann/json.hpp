#pragma once

// Forwards to the vendored single-header release, which ships at the top of
// the vendor include path rather than under its usual nlohmann/ directory.
#include <json.hpp>
