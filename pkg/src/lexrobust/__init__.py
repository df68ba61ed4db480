"""Choose the more noise-robust member of a synonym pair.

Signal path (mixing at a target SNR, STOI), lexical features (phoneme
length, n-gram predictability), listener-transcript scoring and the
regression models that tie them to recognition differences.
"""

from .audio import AudioSignal, NoiseCondition, load_wav, mix_at_snr, resample, rms, write_wav
from .hrs import (
    PairComparison, ResponseRecord, StimulusScore, compare_pairs, compute_hrs, condition_summary,
    judge_response,
)
from .lexicon import (
    PronunciationLexicon, SynonymPairRecord, default_lexicon, load_lexicon, load_pairs,
    phoneme_length, phonetic_match,
)
from .lm import NgramModel, load_model, save_model, train
from .regression import DesignMatrix, FitResult, aic, ols_fit, stepwise_select
from .selector import (
    ConditionModel, FeatureVector, WordAudio, canonical_models, choose, extract_features,
    predict_diff_hrs,
)
from .stoi import StoiConfig, compute_stoi, remove_silent_frames, third_octave_envelopes

__version__ = "0.1.0"
