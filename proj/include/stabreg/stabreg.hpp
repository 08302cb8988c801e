#pragma once

#include "stabreg/core.hpp"
#include "stabreg/decomposition.hpp"
#include "stabreg/definable.hpp"
#include "stabreg/generators.hpp"
#include "stabreg/homogeneity.hpp"
#include "stabreg/norms.hpp"
#include "stabreg/params.hpp"
#include "stabreg/partition.hpp"
#include "stabreg/stability.hpp"
