"""Energy expenditure estimation from heart rate and wrist heat flux.

Pipeline: raw sensor CSVs -> 30 s feature bins -> PCA subject projection ->
ordinary least squares -> leave-one-subject-out R^2 per predictor scenario.
"""

__version__ = "0.1.0"
