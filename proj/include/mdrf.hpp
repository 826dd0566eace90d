#pragma once

#include "mdrf/autodiff/batched.hpp"
#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/autodiff/jet.hpp"
#include "mdrf/autodiff/tape.hpp"
#include "mdrf/baseline.hpp"
#include "mdrf/config.hpp"
#include "mdrf/ensemble.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/format.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/io.hpp"
#include "mdrf/metrics.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"
#include "mdrf/parallel.hpp"
#include "mdrf/physics/data_field.hpp"
#include "mdrf/physics/expr.hpp"
#include "mdrf/physics/icbc.hpp"
#include "mdrf/physics/residual2d.hpp"
#include "mdrf/physics/residual3d.hpp"
#include "mdrf/problem.hpp"
#include "mdrf/sampling.hpp"
#include "mdrf/snapshot.hpp"
#include "mdrf/training.hpp"
