#pragma once

#include "uol/config.hpp"
#include "uol/csv.hpp"
#include "uol/epoch_hedge.hpp"
#include "uol/errors.hpp"
#include "uol/expert_family.hpp"
#include "uol/harness.hpp"
#include "uol/hedge.hpp"
#include "uol/loss_space.hpp"
#include "uol/process_lab.hpp"
#include "uol/rng.hpp"
#include "uol/run_record.hpp"
