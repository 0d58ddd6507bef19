#pragma once

#include "ladg/assembly.hpp"
#include "ladg/basis.hpp"
#include "ladg/constants.hpp"
#include "ladg/core.hpp"
#include "ladg/driver.hpp"
#include "ladg/estimators.hpp"
#include "ladg/history.hpp"
#include "ladg/linsolve.hpp"
#include "ladg/mesh.hpp"
#include "ladg/potential.hpp"
#include "ladg/problem.hpp"
#include "ladg/problems.hpp"
#include "ladg/quadrature.hpp"
#include "ladg/rtn.hpp"
#include "ladg/space.hpp"
