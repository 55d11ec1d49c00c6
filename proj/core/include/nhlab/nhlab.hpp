// Umbrella header.
#pragma once

#include <nhlab/analysis.hpp>
#include <nhlab/attitude.hpp>
#include <nhlab/dynamics.hpp>
#include <nhlab/frames.hpp>
#include <nhlab/integrate.hpp>
#include <nhlab/profile.hpp>
#include <nhlab/systems.hpp>
#include <nhlab/types.hpp>
