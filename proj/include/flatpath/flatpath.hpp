#pragma once

#include "flatpath/errors.hpp"
#include "flatpath/lattice.hpp"
#include "flatpath/graph_io.hpp"
#include "flatpath/generators.hpp"
#include "flatpath/cohomology.hpp"
#include "flatpath/floquet.hpp"
#include "flatpath/sweep.hpp"
