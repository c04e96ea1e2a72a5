"""Odometer-style water meter reading from grayscale images.

The pipeline: fixed-geometry cell segmentation, per-cell Otsu binarization,
border/speck filtering, column projection-profile matching, hole topology
for the 5/6/8/9 confusion set, rolling-wheel (half-word) resolution and a
cross-wheel consistency pass. ``meterread.synth`` renders labelled test
meters for every stage.
"""

from meterread.raster import Rect, PGMError, load_pgm, save_pgm, crop
from meterread.preproc import (
    MeterGeometry,
    split_cells,
    histogram,
    otsu_threshold,
    binarize,
    clear_border,
    remove_small,
)
from meterread.projmatch import (
    ProjectionProfile,
    TemplateSet,
    MatchRanking,
    column_profile,
    resample_profile,
    train_templates,
    match_digit,
)
from meterread.topo import LabelMap, HoleFeatures, label_components, hole_features, disambiguate_5689
from meterread.halfword import SplitDecision, HalfMatch, detect_split, match_half, resolve_pair
from meterread.reading import (
    FullVerdict,
    HalfVerdict,
    Unreadable,
    CellResult,
    MeterReading,
    Thresholds,
    Recognizer,
    classify_cell,
    resolve_reading,
)

__version__ = "0.1.0"
