from app.data.dataset import InferenceInputs, load_experiment_specs

__all__ = ["InferenceInputs", "load_experiment_specs"]
