#pragma once

#include "errors.hpp"
#include "kernel.hpp"
#include "cone.hpp"
#include "domain.hpp"
#include "field.hpp"
#include "distance.hpp"
#include "field_io.hpp"
#include "report.hpp"
#include "elliptic.hpp"
#include "weights.hpp"
#include "barrier.hpp"
#include "envelope.hpp"
#include "comparison.hpp"
#include "theta.hpp"
#include "config.hpp"
#include "harness.hpp"
