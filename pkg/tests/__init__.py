# TableGen Tests
