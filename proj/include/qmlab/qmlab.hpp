#pragma once

#include "qmlab/error.hpp"
#include "qmlab/algebra.hpp"
#include "qmlab/random.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/tower.hpp"
#include "qmlab/af_metric.hpp"
#include "qmlab/af_ideals.hpp"
#include "qmlab/commutative.hpp"
#include "qmlab/comm_ball.hpp"
#include "qmlab/fixtures.hpp"
#include "qmlab/json_io.hpp"
#include "qmlab/harness.hpp"
