#pragma once

#include "galga/acquisition.hpp"
#include "galga/builder.hpp"
#include "galga/error.hpp"
#include "galga/geometry.hpp"
#include "galga/harness.hpp"
#include "galga/interpolation.hpp"
#include "galga/io.hpp"
#include "galga/sampling.hpp"
#include "galga/space.hpp"
#include "galga/targets.hpp"
