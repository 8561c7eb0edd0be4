"""People detection and offline path tracking for recorded surveillance video.

Dense HOG features scored by a linear SVM over sliding windows, optionally
restricted to salient regions (the frame multiplied by a saliency map, with
low-saliency windows skipped), followed by k-means clustering of the logged
detections into per-person tracks.
"""

from .detector import DetectParams, Detection, DetectStats, detect_full, detect_salient, nms, sliding_windows
from .errors import (BoundsError, ConfigError, DataError, FormatError,
                     PipelineError, ShapeError)
from .evaluate import (BenchResult, EvalReport, GroundTruthBox, bench_compare,
                       format_bench_report, iou, match_and_score)
from .hog import (GradientField, GrayImage, HogConfig, HogDescriptor,
                  block_normalize, cell_histograms, compute_gradients,
                  hog_dense, hog_window)
from .saliency import (FileMapProvider, SaliencyMap, SaliencyProvider,
                       SpectralResidualProvider, apply_window, load_map,
                       mean_saliency, normalize_map, resolve_provider,
                       save_map, spectral_residual)
from .svm import (LabeledSample, LinearSvmModel, TrainParams, classify,
                  load_model, save_model, score, train, training_accuracy)
from .tracker import (ClusterPoint, DetectionRecord, KMeansResult, Track,
                      build_points, build_tracks, choose_k, kmeans,
                      load_record, make_record, same_frame_collisions,
                      save_record, track)

__version__ = "0.1.0"
