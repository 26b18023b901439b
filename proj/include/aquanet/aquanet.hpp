#pragma once

// Umbrella header for the aquanet simulation framework: a deterministic
// discrete-event model of smart-irrigation controller botnets (detection,
// protocol spoofing, replay) coupled with a flow-network damage model for
// urban water distribution.

#include "aquanet/attacks.hpp"
#include "aquanet/botnet.hpp"
#include "aquanet/damage.hpp"
#include "aquanet/detector.hpp"
#include "aquanet/devices.hpp"
#include "aquanet/metering.hpp"
#include "aquanet/payload.hpp"
#include "aquanet/rng.hpp"
#include "aquanet/runner.hpp"
#include "aquanet/scenario.hpp"
#include "aquanet/services.hpp"
#include "aquanet/sim.hpp"
#include "aquanet/traffic.hpp"
#include "aquanet/types.hpp"
#include "aquanet/watering.hpp"
#include "aquanet/weather.hpp"
#include "aquanet/world.hpp"
