"""Activation tags shared by both kernel backends."""

ACT_RELU = 0
ACT_IDENTITY = 1
ACT_TANH = 2

TAG_NAMES = {ACT_RELU: "relu", ACT_IDENTITY: "identity", ACT_TANH: "tanh"}
NAME_TAGS = {v: k for k, v in TAG_NAMES.items()}
