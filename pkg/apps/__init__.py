"""
应用模块：k-SAT、独立截线、拉丁截线
"""
