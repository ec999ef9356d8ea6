#pragma once

#include "hjplace/geometry.hpp"
#include "hjplace/errors.hpp"
#include "hjplace/grid.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/windfield.hpp"
#include "hjplace/solver.hpp"
#include "hjplace/pathing.hpp"
#include "hjplace/objective.hpp"
#include "hjplace/placement.hpp"
#include "hjplace/io.hpp"
#include "hjplace/render.hpp"
