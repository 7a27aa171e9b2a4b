#pragma once

#include "chaoskit/determinism.hpp"
#include "chaoskit/embedding.hpp"
#include "chaoskit/fnn.hpp"
#include "chaoskit/io.hpp"
#include "chaoskit/lyapunov.hpp"
#include "chaoskit/neighbors.hpp"
#include "chaoskit/pipeline.hpp"
#include "chaoskit/series.hpp"
#include "chaoskit/synth.hpp"
