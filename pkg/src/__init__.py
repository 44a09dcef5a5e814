"""Churn MLP - customer churn prediction with a from-scratch multilayer perceptron."""

__version__ = "0.1.0"
