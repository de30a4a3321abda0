// Umbrella header.
#pragma once

#include "ockg/detector.hpp"
#include "ockg/divergence.hpp"
#include "ockg/errors.hpp"
#include "ockg/evaluation.hpp"
#include "ockg/graph.hpp"
#include "ockg/io.hpp"
#include "ockg/kernel.hpp"
#include "ockg/moments.hpp"
#include "ockg/pipeline.hpp"
#include "ockg/rng.hpp"
#include "ockg/scenarios.hpp"
#include "ockg/solver.hpp"
#include "ockg/tuning.hpp"
