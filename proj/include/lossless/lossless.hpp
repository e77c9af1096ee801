#pragma once

// Umbrella header.

#include "errors.hpp"
#include "numcore.hpp"
#include "unitary_pair.hpp"
#include "jlossless.hpp"
#include "tau.hpp"
#include "chart.hpp"
#include "schur.hpp"
#include "atlas.hpp"
#include "io.hpp"
#include "fit.hpp"
