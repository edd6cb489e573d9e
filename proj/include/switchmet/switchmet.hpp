#pragma once

// Convenience umbrella for the whole library.

#include "switchmet/config.hpp"
#include "switchmet/estimation.hpp"
#include "switchmet/experiments.hpp"
#include "switchmet/fock_oracle.hpp"
#include "switchmet/io.hpp"
#include "switchmet/phase_algebra.hpp"
#include "switchmet/random.hpp"
#include "switchmet/switch_protocol.hpp"
#include "switchmet/version.hpp"
