from mirrordepth.py.training.AdamOptimizer import AdamConfig, AdamState
from mirrordepth.py.training.AdamOptimizer import adamStep
from mirrordepth.py.training.Augmentation import AugmentConfig, augment
from mirrordepth.py.training.Trainer import TrainConfig, Trainer, train
