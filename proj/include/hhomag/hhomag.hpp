// Umbrella header.

#ifndef HHOMAG_HHOMAG_HPP
#define HHOMAG_HHOMAG_HPP

#include "quadrature.hpp"
#include "mesh.hpp"
#include "mesh_io.hpp"
#include "mesh_generators.hpp"
#include "topology.hpp"
#include "poly_basis.hpp"
#include "hybrid_spaces.hpp"
#include "local_ops.hpp"
#include "assembly.hpp"
#include "testcases.hpp"
#include "convergence.hpp"
#include "checks.hpp"

#endif
