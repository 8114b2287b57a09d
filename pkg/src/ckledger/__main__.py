from ckledger.cli import main

raise SystemExit(main())
