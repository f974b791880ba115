#pragma once

#include "mmv2v/engine.hpp"
#include "mmv2v/channel.hpp"
#include "mmv2v/phy_mac.hpp"
#include "mmv2v/stack.hpp"
#include "mmv2v/scenario.hpp"
#include "mmv2v/config.hpp"
#include "mmv2v/batch.hpp"
