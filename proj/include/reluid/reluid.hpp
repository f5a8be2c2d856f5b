#pragma once

#include "scalar.hpp"
#include "network.hpp"
#include "paths.hpp"
#include "admissibility.hpp"
#include "embedding.hpp"
#include "equivalence.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "diagnostics.hpp"
#include "activation.hpp"
#include "counterexamples.hpp"
#include "identification.hpp"
#include "recovery.hpp"
