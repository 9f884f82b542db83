#pragma once

#include "actens/activations.hpp"
#include "actens/config.hpp"
#include "actens/dataset.hpp"
#include "actens/ensemble.hpp"
#include "actens/gradcheck.hpp"
#include "actens/matrix.hpp"
#include "actens/network.hpp"
#include "actens/protocol.hpp"
#include "actens/registry.hpp"
#include "actens/rng.hpp"
#include "actens/scores.hpp"
#include "actens/text.hpp"
#include "actens/wilcoxon.hpp"
