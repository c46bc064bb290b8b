#pragma once

#include "paracflow/cbo/bo.hpp"
#include "paracflow/cbo/kt.hpp"
#include "paracflow/core/parallel.hpp"
#include "paracflow/diffeo/decompose.hpp"
#include "paracflow/diffeo/single_coordinate.hpp"
#include "paracflow/flows/eliminator.hpp"
#include "paracflow/flows/train.hpp"
#include "paracflow/numkit/svd.hpp"
#include "paracflow/taiji/experiments.hpp"
