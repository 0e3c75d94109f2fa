"""jvm-by-pe - 部分評価による JVM バイトコードの逆コンパイルと検証"""
