#pragma once

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/forest_enum.hpp"
#include "forestmat/forest_matrices.hpp"
#include "forestmat/markov.hpp"
#include "forestmat/matrix.hpp"
#include "forestmat/ranking.hpp"
#include "forestmat/rational.hpp"
#include "forestmat/structure.hpp"
