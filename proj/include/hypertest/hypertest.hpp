#pragma once

#include "hypertest/common.hpp"
#include "hypertest/rational.hpp"
#include "hypertest/hypergraph.hpp"
#include "hypertest/hypergraph_io.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_io.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/distribution.hpp"
#include "hypertest/density.hpp"
#include "hypertest/sampling.hpp"
#include "hypertest/norms.hpp"
#include "hypertest/regularity.hpp"
#include "hypertest/energy.hpp"
#include "hypertest/linear.hpp"
#include "hypertest/nd.hpp"
#include "hypertest/transfer.hpp"
#include "hypertest/property.hpp"
#include "hypertest/bounds.hpp"
