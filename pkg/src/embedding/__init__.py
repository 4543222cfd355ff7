"""
Patch embedding and the early stage of ViT-style and Swin-style encoders.
"""
