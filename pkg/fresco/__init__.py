from .mopso import run
__all__ = ['parameters',
           'archive',
           'mopso',
           'sim',
           'experiments',
           'verification',
           'input_output',
           'models'
           ]
