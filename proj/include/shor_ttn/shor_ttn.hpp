#pragma once

#include "shor_ttn/errors.hpp"
#include "shor_ttn/modmath.hpp"
#include "shor_ttn/tensor.hpp"
#include "shor_ttn/svd.hpp"
#include "shor_ttn/ttn.hpp"
#include "shor_ttn/mps.hpp"
#include "shor_ttn/oracle.hpp"
#include "shor_ttn/pipeline.hpp"
#include "shor_ttn/verify.hpp"
