#pragma once

#include "ber_analytics.hpp"
#include "code_construction.hpp"
#include "encoded_channel.hpp"
#include "fading.hpp"
#include "harness.hpp"
#include "modem.hpp"
#include "orthogonal_decoder.hpp"
