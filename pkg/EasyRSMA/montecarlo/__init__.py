from .estimator import (
    BatchMeans,
    MIN_SAMPLES,
    McEstimate,
    McMode,
    RunningMoments,
    StreamAccumulator,
    UserRateAccumulation,
    accumulate_user_rates,
    batch_slices,
    check_samples,
    mc_stream_rate,
    mc_stream_rates,
    mc_user_rate,
    mc_user_rates,
)
from .full_model import ReceivedSignal, StreamMoments, mc_full_model_rate, moment_batch_size, simulate_received_signal
from .rng import Purpose, check_seed, substream
from .sampler import DEFAULT_BLOCK_SIZE, channel_gain_blocks, sample_channel_power, standard_gamma

__all__ = [
    "BatchMeans",
    "DEFAULT_BLOCK_SIZE",
    "MIN_SAMPLES",
    "McEstimate",
    "McMode",
    "Purpose",
    "ReceivedSignal",
    "RunningMoments",
    "StreamMoments",
    "StreamAccumulator",
    "UserRateAccumulation",
    "accumulate_user_rates",
    "batch_slices",
    "channel_gain_blocks",
    "check_samples",
    "check_seed",
    "mc_full_model_rate",
    "mc_stream_rate",
    "mc_stream_rates",
    "mc_user_rate",
    "mc_user_rates",
    "moment_batch_size",
    "sample_channel_power",
    "simulate_received_signal",
    "standard_gamma",
    "substream",
]
