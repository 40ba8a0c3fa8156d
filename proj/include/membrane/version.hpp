#pragma once

#define MEMBRANE_LAB_VERSION "0.1.0"

namespace membrane {
inline const char* version() { return MEMBRANE_LAB_VERSION; }
}
