"""Maritime AIS analysis: kinematics, preprocessing, forecasting, briefings."""

try:  # packaged layout (pip install)
    from . import _aisllm as _impl
except ImportError:  # build-tree layout (module next to the package on sys.path)
    import _aisllm as _impl

ade_fde = _impl.ade_fde
bleu4 = _impl.bleu4
config_help = _impl.config_help
cri = _impl.cri
dcpa_tcpa = _impl.dcpa_tcpa
evaluate_checkpoint = _impl.evaluate_checkpoint
haversine_nm = _impl.haversine_nm
initial_bearing = _impl.initial_bearing
lr_schedule = _impl.lr_schedule
predict_window = _impl.predict_window
preprocess_csv = _impl.preprocess_csv
prf1 = _impl.prf1
rouge_l = _impl.rouge_l
synthesize_dataset = _impl.synthesize_dataset
train_model = _impl.train_model

__all__ = [
    "ade_fde",
    "bleu4",
    "config_help",
    "cri",
    "dcpa_tcpa",
    "evaluate_checkpoint",
    "haversine_nm",
    "initial_bearing",
    "lr_schedule",
    "predict_window",
    "preprocess_csv",
    "prf1",
    "rouge_l",
    "synthesize_dataset",
    "train_model",
]
