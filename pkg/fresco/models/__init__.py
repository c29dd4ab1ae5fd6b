from .aoi import network_average_age
from .fairness import fairness_report
__all__ = ['basic_functions',
           # models
           'geometry',
           'dcf',
           'fairness',
           'aoi'
           ]
