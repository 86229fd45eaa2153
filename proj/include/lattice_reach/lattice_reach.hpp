#pragma once

#include "lattice_reach/errors.hpp"
#include "lattice_reach/face_lattice.hpp"
#include "lattice_reach/hyperplane.hpp"
#include "lattice_reach/io.hpp"
#include "lattice_reach/lp.hpp"
#include "lattice_reach/network.hpp"
#include "lattice_reach/oracle.hpp"
#include "lattice_reach/parallel.hpp"
#include "lattice_reach/reach.hpp"
#include "lattice_reach/verify.hpp"
