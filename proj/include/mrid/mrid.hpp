#ifndef MRID_MRID_HPP
#define MRID_MRID_HPP

#include "mrid/error.hpp"
#include "mrid/numerics.hpp"
#include "mrid/statespace.hpp"
#include "mrid/multirate.hpp"
#include "mrid/cyclic.hpp"
#include "mrid/subspace_id.hpp"
#include "mrid/transform.hpp"
#include "mrid/io.hpp"
#include "mrid/pipeline.hpp"
#include "mrid/benchmark.hpp"
#include "mrid/demo.hpp"

#endif  // MRID_MRID_HPP
