#pragma once

#include "verirag/audit_pipeline.hpp"
#include "verirag/baselines.hpp"
#include "verirag/calibration.hpp"
#include "verirag/config.hpp"
#include "verirag/core_model.hpp"
#include "verirag/corpus_store.hpp"
#include "verirag/engine.hpp"
#include "verirag/error.hpp"
#include "verirag/evaluation.hpp"
#include "verirag/hash.hpp"
#include "verirag/hv_score.hpp"
#include "verirag/io.hpp"
#include "verirag/llm_client.hpp"
#include "verirag/prompts.hpp"
#include "verirag/redundancy.hpp"
#include "verirag/threshold.hpp"
