#pragma once

#include "fracmart/bellman_dp.hpp"
#include "fracmart/bracket.hpp"
#include "fracmart/cancellation.hpp"
#include "fracmart/context.hpp"
#include "fracmart/io.hpp"
#include "fracmart/lemmas.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/operator.hpp"
#include "fracmart/parallel.hpp"
#include "fracmart/phi.hpp"
#include "fracmart/pipeline.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/sampling.hpp"
#include "fracmart/search.hpp"
#include "fracmart/special_functions.hpp"
#include "fracmart/supersolution.hpp"
#include "fracmart/transform.hpp"
