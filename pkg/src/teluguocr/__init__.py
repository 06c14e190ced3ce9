"""OCR engine for Telugu-like abugida scripts.

Pipeline: skew correction, binarization, MSER word detection, connected
component character segmentation with modifier grouping, and a dual-CNN
classifier (main character + vattu/gunintham) composed into Unicode text.
"""

__version__ = "0.1.0"
