#pragma once

#include "eight/action_bounds.hpp"
#include "eight/configuration.hpp"
#include "eight/equipotential.hpp"
#include "eight/errors.hpp"
#include "eight/integrator.hpp"
#include "eight/io.hpp"
#include "eight/minimizer.hpp"
#include "eight/orbit.hpp"
#include "eight/path.hpp"
#include "eight/pipeline.hpp"
#include "eight/shape.hpp"
#include "eight/verification.hpp"
